//! Graded shift operators on spaces with bosonic and fermionic registers.
//!
//! An operator is a 2^F x 2^F matrix of shift-term sums: the cell (row, col)
//! maps fermionic occupation `col` to `row`, and each shift term moves the
//! bosonic occupations by an offset tuple while multiplying by an
//! index-dependent coefficient. All catalog identities are decided on this
//! exact realization; the truncated matrix is only a cross-check.

pub mod abasis;
pub mod coeff;
pub mod matrix;

pub use coeff::{CfMono, CoeffFn, RegMono, MAX_BOSONIC};

use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A space with named bosonic and fermionic registers. B >= 1, F <= 2.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SpaceSignature {
    pub bosonic: Vec<String>,
    pub fermionic: Vec<String>,
}

impl SpaceSignature {
    pub fn new(bosonic: &[&str], fermionic: &[&str]) -> Arc<Self> {
        assert!(
            !bosonic.is_empty() && bosonic.len() <= MAX_BOSONIC,
            "1..=2 bosonic registers"
        );
        assert!(fermionic.len() <= 2, "at most 2 fermionic registers");
        Arc::new(SpaceSignature {
            bosonic: bosonic.iter().map(|s| s.to_string()).collect(),
            fermionic: fermionic.iter().map(|s| s.to_string()).collect(),
        })
    }

    /// Functions of z and theta: one bosonic register (the z-exponent) and
    /// one fermionic register.
    pub fn z_space() -> Arc<Self> {
        Self::new(&["k"], &["theta"])
    }

    /// The Fock space of the a, b, alpha, beta oscillators.
    pub fn landau() -> Arc<Self> {
        Self::new(&["n_a", "n_b"], &["n_alpha", "n_beta"])
    }

    pub fn n_bosonic(&self) -> usize {
        self.bosonic.len()
    }

    pub fn n_fermionic(&self) -> usize {
        self.fermionic.len()
    }

    pub fn fermion_dim(&self) -> u8 {
        1u8 << self.fermionic.len()
    }
}

/// Bosonic offset tuple (unused registers stay zero).
pub type Offsets = [i32; MAX_BOSONIC];

type Cell = BTreeMap<Offsets, CoeffFn>;

/// A parity-homogeneous graded shift operator in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedOperator {
    sig: Arc<SpaceSignature>,
    parity: u8,
    cells: BTreeMap<(u8, u8), Cell>,
}

/// First differing normal-form term between two operators; the comparison
/// witness shipped in reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermDiff {
    pub cell: (u8, u8),
    pub offset: Offsets,
    pub lhs: String,
    pub rhs: String,
}

impl GradedOperator {
    pub fn zero(sig: Arc<SpaceSignature>) -> Self {
        GradedOperator {
            sig,
            parity: 0,
            cells: BTreeMap::new(),
        }
    }

    pub fn identity(sig: Arc<SpaceSignature>) -> Self {
        let fdim = sig.fermion_dim();
        let mut op = Self::zero(sig);
        for m in 0..fdim {
            op.add_term(m, m, [0; MAX_BOSONIC], CoeffFn::one());
        }
        op
    }

    /// Build from explicit terms; parity must be consistent across cells.
    pub fn from_terms(
        sig: Arc<SpaceSignature>,
        parity: u8,
        terms: impl IntoIterator<Item = (u8, u8, Offsets, CoeffFn)>,
    ) -> Self {
        let mut op = GradedOperator {
            sig,
            parity,
            cells: BTreeMap::new(),
        };
        for (row, col, off, f) in terms {
            op.add_term_checked(row, col, off, f, parity);
        }
        op.normalize();
        op
    }

    fn add_term(&mut self, row: u8, col: u8, off: Offsets, f: CoeffFn) {
        self.add_term_checked(row, col, off, f, self.parity);
    }

    fn add_term_checked(&mut self, row: u8, col: u8, off: Offsets, f: CoeffFn, parity: u8) {
        if f.is_zero() {
            return;
        }
        let fdim = self.sig.fermion_dim();
        assert!(row < fdim && col < fdim, "fermionic cell out of range");
        assert_eq!(
            (row.count_ones() + col.count_ones()) % 2,
            parity as u32 % 2,
            "cell ({}, {}) violates parity {}",
            row,
            col,
            parity
        );
        self.parity = parity;
        let cell = self.cells.entry((row, col)).or_default();
        match cell.entry(off) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(f);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&f);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn normalize(&mut self) {
        self.cells.retain(|_, c| {
            c.retain(|_, f| !f.is_zero());
            !c.is_empty()
        });
        if self.cells.is_empty() {
            self.parity = 0;
        }
    }

    pub fn signature(&self) -> &Arc<SpaceSignature> {
        &self.sig
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.cells.values().map(|c| c.len()).sum()
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = ((u8, u8), &Offsets, &CoeffFn)> {
        self.cells
            .iter()
            .flat_map(|(rc, cell)| cell.iter().map(move |(off, f)| (*rc, off, f)))
    }

    /// Largest |offset| per bosonic register; the operator's reach for the
    /// safe-window rule.
    pub fn reach(&self) -> [u32; MAX_BOSONIC] {
        let mut r = [0u32; MAX_BOSONIC];
        for (_, off, _) in self.iter_terms() {
            for j in 0..MAX_BOSONIC {
                r[j] = r[j].max(off[j].unsigned_abs());
            }
        }
        r
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.sig, &other.sig) || self.sig == other.sig, "signature mismatch");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.parity, other.parity, "parity mismatch in operator sum");
        let mut r = self.clone();
        for ((row, col), cell) in &other.cells {
            for (off, f) in cell {
                r.add_term(*row, *col, *off, f.clone());
            }
        }
        r.normalize();
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        for cell in r.cells.values_mut() {
            for f in cell.values_mut() {
                *f = f.neg();
            }
        }
        r
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.sig.clone());
        }
        let mut r = self.clone();
        for cell in r.cells.values_mut() {
            for f in cell.values_mut() {
                *f = f.scale(c);
            }
        }
        r
    }

    /// Exact operator product self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        assert!(self.sig == other.sig, "signature mismatch in composition");
        let parity = (self.parity + other.parity) % 2;
        let mut r = GradedOperator {
            sig: self.sig.clone(),
            parity,
            cells: BTreeMap::new(),
        };
        for ((row_x, mid_x), cell_x) in &self.cells {
            for ((mid_y, col_y), cell_y) in &other.cells {
                if mid_x != mid_y {
                    continue;
                }
                for (off_x, f_x) in cell_x {
                    for (off_y, f_y) in cell_y {
                        let mut off = *off_x;
                        for j in 0..MAX_BOSONIC {
                            off[j] += off_y[j];
                        }
                        let f = f_x.shift_all(off_y).mul(f_y);
                        r.add_term_checked(*row_x, *col_y, off, f, parity);
                    }
                }
            }
        }
        r.normalize();
        r
    }

    /// Graded commutator [x, y] = xy - (-1)^(|x||y|) yx.
    pub fn graded_commutator(&self, other: &Self) -> Self {
        let xy = self.compose(other);
        let yx = other.compose(self);
        if self.parity == 1 && other.parity == 1 {
            xy.add_allow_parity(&yx)
        } else {
            xy.sub_allow_parity(&yx)
        }
    }

    // xy and yx always share parity; these exist so the zero operator can
    // combine with either side without a parity assertion.
    fn add_allow_parity(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        self.add(other)
    }

    fn sub_allow_parity(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        self.sub(other)
    }

    /// Left-multiply by a diagonal (fermion-preserving) coefficient
    /// function: the K(P,Q)-style prefactor.
    pub fn apply_left_diag(&self, k: &CoeffFn) -> Self {
        let mut r = GradedOperator {
            sig: self.sig.clone(),
            parity: self.parity,
            cells: BTreeMap::new(),
        };
        for ((row, col), cell) in &self.cells {
            for (off, f) in cell {
                r.add_term_checked(*row, *col, *off, k.shift_all(off).mul(f), self.parity);
            }
        }
        r.normalize();
        r
    }

    /// Minimal sqrt(lambda) order over all coefficients and the operator
    /// formed from exactly that slice, with the lambda powers stripped.
    pub fn lambda_leading(&self) -> Option<(HalfInt, GradedOperator)> {
        let min = self
            .iter_terms()
            .filter_map(|(_, _, f)| f.lambda_min_halves())
            .min()?;
        let mut r = GradedOperator {
            sig: self.sig.clone(),
            parity: self.parity,
            cells: BTreeMap::new(),
        };
        for ((row, col), cell) in &self.cells {
            for (off, f) in cell {
                r.add_term_checked(*row, *col, *off, f.lambda_slice(min), self.parity);
            }
        }
        r.normalize();
        Some((HalfInt::new(min as i64), r))
    }

    /// The slice of the operator at exactly sqrt(lambda) order `halves`.
    pub fn lambda_slice(&self, halves: i32) -> GradedOperator {
        let mut r = GradedOperator {
            sig: self.sig.clone(),
            parity: self.parity,
            cells: BTreeMap::new(),
        };
        for ((row, col), cell) in &self.cells {
            for (off, f) in cell {
                r.add_term_checked(*row, *col, *off, f.lambda_slice(halves), self.parity);
            }
        }
        r.normalize();
        r
    }

    /// First differing term of the two normal forms, in (cell, offset)
    /// order; None when the operators are equal.
    pub fn first_diff(&self, other: &Self) -> Option<TermDiff> {
        if self == other {
            return None;
        }
        let mut keys: Vec<((u8, u8), Offsets)> = Vec::new();
        for (rc, off, _) in self.iter_terms().chain(other.iter_terms()) {
            keys.push((rc, *off));
        }
        keys.sort();
        keys.dedup();
        for (rc, off) in keys {
            let l = self.cells.get(&rc).and_then(|c| c.get(&off));
            let r = other.cells.get(&rc).and_then(|c| c.get(&off));
            if l != r {
                return Some(TermDiff {
                    cell: rc,
                    offset: off,
                    lhs: l.map(|f| f.to_string()).unwrap_or_else(|| "0".into()),
                    rhs: r.map(|f| f.to_string()).unwrap_or_else(|| "0".into()),
                });
            }
        }
        // Operators differ only in parity labels of empty content.
        None
    }
}

impl fmt::Display for GradedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((row, col), off, c) in self.iter_terms() {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            let nb = self.sig.n_bosonic();
            write!(f, "[{}<-{}] d=(", row, col)?;
            for (j, d) in off.iter().take(nb).enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", d)?;
            }
            write!(f, "): {}", c)?;
        }
        Ok(())
    }
}

impl fmt::Debug for GradedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op[parity {}] {}", self.parity, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::DeformationSpec;
    use crate::generators::GeneratorId;

    #[test]
    fn lambda_leading_of_generators() {
        let spec = DeformationSpec::pq_case();
        // A generator of depth zero sits at order -1/2 and its leading
        // part is the bare shift.
        let l0 = GeneratorId::VirL { m: 2, s: 0 }.build(&spec).unwrap();
        let (order, lead) = l0.lambda_leading().unwrap();
        assert_eq!(order, HalfInt::new(-1));
        let expect = GradedOperator::from_terms(
            SpaceSignature::z_space(),
            0,
            [
                (0u8, 0u8, [2, 0], CoeffFn::one()),
                (1u8, 1u8, [2, 0], CoeffFn::one()),
            ],
        );
        assert_eq!(lead, expect);
        // A lambda-free operator is its own leading part at order zero.
        let id = GradedOperator::identity(SpaceSignature::z_space());
        let (order, lead) = id.lambda_leading().unwrap();
        assert_eq!(order, HalfInt::ZERO);
        assert_eq!(lead, id);
        // lambda^2 X + lambda^3 Y has order 2 and leading part X.
        let x = GradedOperator::from_terms(
            SpaceSignature::z_space(),
            0,
            [(0u8, 0u8, [1, 0], CoeffFn::one()), (1u8, 1u8, [1, 0], CoeffFn::one())],
        );
        let y = GradedOperator::from_terms(
            SpaceSignature::z_space(),
            0,
            [(0u8, 0u8, [0, 0], CoeffFn::one()), (1u8, 1u8, [0, 0], CoeffFn::one())],
        );
        let sum = x
            .scale(&Scalar::lambda_pow(HalfInt::from_int(2)))
            .add(&y.scale(&Scalar::lambda_pow(HalfInt::from_int(3))));
        let (order, lead) = sum.lambda_leading().unwrap();
        assert_eq!(order, HalfInt::from_int(2));
        assert_eq!(lead, x);
        // The zero operator has no leading part.
        assert!(GradedOperator::zero(SpaceSignature::z_space())
            .lambda_leading()
            .is_none());
    }
}

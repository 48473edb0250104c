//! Index-dependent coefficient functions.
//!
//! A `CoeffFn` is a finite sum of terms
//!     scalar * U_j^a * V_j^b * nu_j^c   (per bosonic register j)
//! where U_j stands for p^(nu_j) and V_j for q^(nu_j). Deformed-number
//! coefficients live in the U, V part; plain occupation counters (the
//! undeformed number operators) live in the nu part. Both are closed under
//! the index shift nu_j -> nu_j + d, which is what makes exact operator
//! composition possible.

use crate::backend::{BackendError, DeformationSpec, RForm};
use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;
use std::fmt;

/// Maximum number of bosonic registers any signature uses.
pub const MAX_BOSONIC: usize = 2;

/// Exponents for one register: U^u * V^v * nu^nu_pow.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct RegMono {
    pub u: i32,
    pub v: i32,
    pub nu_pow: u16,
}

/// One monomial across all registers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct CfMono {
    pub regs: [RegMono; MAX_BOSONIC],
}

impl CfMono {
    fn mul(&self, other: &CfMono) -> CfMono {
        let mut r = *self;
        for j in 0..MAX_BOSONIC {
            r.regs[j].u += other.regs[j].u;
            r.regs[j].v += other.regs[j].v;
            r.regs[j].nu_pow += other.regs[j].nu_pow;
        }
        r
    }

}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CoeffFn {
    terms: BTreeMap<CfMono, Scalar>,
}

fn binom_i64(n: u16, k: u16) -> i64 {
    let mut r: i64 = 1;
    for i in 0..k {
        r = r * (n as i64 - i as i64) / (i as i64 + 1);
    }
    r
}

impl CoeffFn {
    pub fn zero() -> Self {
        CoeffFn::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(CfMono::default(), c);
        }
        CoeffFn { terms }
    }

    /// U_reg^k, i.e. p^(k*nu_reg).
    pub fn u_pow(reg: usize, k: i32) -> Self {
        let mut m = CfMono::default();
        m.regs[reg].u = k;
        Self::monomial(m, Scalar::one())
    }

    /// V_reg^k, i.e. q^(k*nu_reg).
    pub fn v_pow(reg: usize, k: i32) -> Self {
        let mut m = CfMono::default();
        m.regs[reg].v = k;
        Self::monomial(m, Scalar::one())
    }

    /// The occupation number nu_reg itself.
    pub fn nu_var(reg: usize) -> Self {
        let mut m = CfMono::default();
        m.regs[reg].nu_pow = 1;
        Self::monomial(m, Scalar::one())
    }

    pub fn monomial(m: CfMono, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        CoeffFn { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&CfMono::default())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter_terms(&self) -> impl DoubleEndedIterator<Item = (&CfMono, &Scalar)> {
        self.terms.iter()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&CfMono::default()) {
                return Some(c.clone());
            }
        }
        None
    }

    fn insert_add(&mut self, m: CfMono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert_add(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.insert_add(*m, -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        CoeffFn {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut r = CoeffFn::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                r.insert_add(ma.mul(mb), ca * cb);
            }
        }
        r
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        CoeffFn {
            terms: self.terms.iter().map(|(m, k)| (*m, k * c)).collect(),
        }
    }

    /// The shift endomorphism nu_reg -> nu_reg + d on one register:
    /// U -> p^d U, V -> q^d V, nu -> nu + d.
    pub fn shift(&self, reg: usize, d: i32) -> Self {
        if d == 0 {
            return self.clone();
        }
        let mut r = CoeffFn::zero();
        for (m, c) in &self.terms {
            let rm = m.regs[reg];
            // p^(d*u) q^(d*v) from the U, V part.
            let base = &(c * &Scalar::p_pow(HalfInt::from_int((d * rm.u) as i64)))
                * &Scalar::q_pow(HalfInt::from_int((d * rm.v) as i64));
            // (nu + d)^c expanded binomially over the nu part.
            for i in 0..=rm.nu_pow {
                let coeff = BigRational::from_integer(BigInt::from(binom_i64(rm.nu_pow, i)))
                    * BigRational::from_integer(BigInt::from(d as i64).pow((rm.nu_pow - i) as u32));
                let mut m2 = *m;
                m2.regs[reg].nu_pow = i;
                r.insert_add(m2, &base * &Scalar::from_rational(coeff));
            }
        }
        r
    }

    /// Shift every register by the given offsets.
    pub fn shift_all(&self, d: &[i32; MAX_BOSONIC]) -> Self {
        let mut r = self.clone();
        for (reg, &dd) in d.iter().enumerate() {
            if dd != 0 {
                r = r.shift(reg, dd);
            }
        }
        r
    }

    /// Evaluate at concrete integer occupation numbers.
    pub fn eval(&self, nu: &[i64; MAX_BOSONIC]) -> Scalar {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (j, rm) in m.regs.iter().enumerate() {
                if rm.u != 0 {
                    t = &t * &Scalar::p_pow(HalfInt::from_int(rm.u as i64 * nu[j]));
                }
                if rm.v != 0 {
                    t = &t * &Scalar::q_pow(HalfInt::from_int(rm.v as i64 * nu[j]));
                }
                if rm.nu_pow != 0 {
                    let f = BigRational::from_integer(BigInt::from(nu[j]).pow(rm.nu_pow as u32));
                    t = &t * &Scalar::from_rational(f);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Minimal sqrt(lambda) exponent across coefficients.
    pub fn lambda_min_halves(&self) -> Option<i32> {
        self.terms
            .values()
            .filter_map(|c| c.lambda_min_halves())
            .min()
    }

    /// The slice with sqrt(lambda) exponent exactly `k`, lambda stripped.
    pub fn lambda_slice(&self, k: i32) -> CoeffFn {
        let mut r = CoeffFn::zero();
        for (m, c) in &self.terms {
            r.insert_add(*m, c.lambda_slice(k));
        }
        r
    }

    /// The deformed number [nu_reg] as a coefficient function. Only
    /// backends whose R is a finite series in (p^nu, q^nu) have one; the
    /// (a,b;p,q) case does not (its denominator depends on nu).
    pub fn number_fn(spec: &DeformationSpec, reg: usize) -> Result<Self, BackendError> {
        match &spec.form {
            RForm::Classical => Ok(Self::nu_var(reg)),
            RForm::Q => {
                // (1 - V)/(1 - q)
                let inv = Scalar::from_ratio(
                    crate::laurent::LaurentPoly::one(),
                    crate::laurent::LaurentPoly::one()
                        .sub(&crate::laurent::LaurentPoly::gen_pow(crate::laurent::Gen::SqrtQ, 2)),
                )
                .expect("1 - q != 0");
                Ok(Self::constant(inv.clone()).sub(&Self::v_pow(reg, 1).scale(&inv)))
            }
            RForm::Pq => {
                let inv = Scalar::from_ratio(
                    crate::laurent::LaurentPoly::one(),
                    crate::laurent::LaurentPoly::gen_pow(crate::laurent::Gen::SqrtP, 2)
                        .sub(&crate::laurent::LaurentPoly::gen_pow(crate::laurent::Gen::SqrtQ, 2)),
                )
                .expect("p - q != 0");
                Ok(Self::u_pow(reg, 1).scale(&inv).sub(&Self::v_pow(reg, 1).scale(&inv)))
            }
            RForm::Abpq => Err(BackendError::OperatorUnsupported("(a,b;p,q)")),
            RForm::Series { table } => {
                let mut acc = CoeffFn::zero();
                for t in &table.terms {
                    let mut m = CfMono::default();
                    m.regs[reg].u = t.u;
                    m.regs[reg].v = t.v;
                    acc.insert_add(m, Scalar::from_rational(t.coeff.clone()));
                }
                Ok(acc)
            }
        }
    }

    /// The falling factorial [nu][nu-1]...[nu-k+1] on one register; the
    /// empty product for k = 0.
    pub fn falling_factorial_fn(
        spec: &DeformationSpec,
        reg: usize,
        k: u32,
    ) -> Result<Self, BackendError> {
        let mut acc = CoeffFn::one();
        if k == 0 {
            return Ok(acc);
        }
        let n = Self::number_fn(spec, reg)?;
        for j in 0..k {
            acc = acc.mul(&n.shift(reg, -(j as i32)));
        }
        Ok(acc)
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for (j, rm) in m.regs.iter().enumerate() {
                if rm.u != 0 {
                    write!(f, "*U{}^{}", j, rm.u)?;
                }
                if rm.v != 0 {
                    write!(f, "*V{}^{}", j, rm.v)?;
                }
                if rm.nu_pow != 0 {
                    write!(f, "*n{}^{}", j, rm.nu_pow)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::DeformationSpec;

    #[test]
    fn shift_of_u_is_scalar_multiple() {
        // U shifted by d = 2 becomes p^2 * U (definition of the shift).
        let u = CoeffFn::u_pow(0, 1);
        let shifted = u.shift(0, 2);
        assert_eq!(shifted, u.scale(&Scalar::p_pow(HalfInt::from_int(2))));
    }

    #[test]
    fn evaluate_matches_scalar_number() {
        // Evaluating [nu]_(p,q) at nu = 2 agrees with the scalar [2].
        let spec = DeformationSpec::pq_case();
        let n = CoeffFn::number_fn(&spec, 0).unwrap();
        assert_eq!(n.eval(&[2, 0]), spec.deformed_number(HalfInt::from_int(2)));
    }

    #[test]
    fn shift_then_evaluate_commutes() {
        let spec = DeformationSpec::pq_case();
        let f = CoeffFn::falling_factorial_fn(&spec, 0, 2).unwrap();
        for d in [-2i32, 1, 3] {
            for nu in -3..=3i64 {
                assert_eq!(
                    f.shift(0, d).eval(&[nu, 0]),
                    f.eval(&[nu + d as i64, 0]),
                    "d={} nu={}",
                    d,
                    nu
                );
            }
        }
        // Same for the classical counter polynomial (nu + 1/2 style parts).
        let cl = DeformationSpec::classical();
        let g = CoeffFn::falling_factorial_fn(&cl, 0, 3).unwrap();
        assert_eq!(g.shift(0, 2).eval(&[1, 0]), g.eval(&[3, 0]));
    }

    #[test]
    fn falling_factorial_vanishes_above_index() {
        // A^3 evaluated at nu = 2 hits the factor [0] = 0.
        for spec in [
            DeformationSpec::pq_case(),
            DeformationSpec::q_case(),
            DeformationSpec::classical(),
        ] {
            let f = CoeffFn::falling_factorial_fn(&spec, 0, 3).unwrap();
            assert!(f.eval(&[2, 0]).is_zero());
        }
    }

    #[test]
    fn difference_with_itself_is_zero() {
        let spec = DeformationSpec::pq_case();
        let n = CoeffFn::number_fn(&spec, 0).unwrap();
        assert!(n.sub(&n).is_zero());
    }

    #[test]
    fn abpq_has_no_coefficient_function() {
        let spec = DeformationSpec::new(crate::backend::RForm::Abpq);
        assert!(matches!(
            CoeffFn::number_fn(&spec, 0),
            Err(BackendError::OperatorUnsupported(_))
        ));
    }
}

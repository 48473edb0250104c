//! The deformed super n-bracket and the identity checkers built on it.
//!
//! The bracket of n operators is the Koszul-signed antisymmetrized sum of
//! their n! ordered products; for even n it also carries the deformed
//! prefactor [-2M]/(2[-M]) at the total mode weight M. Products are
//! memoized through an interning arena keyed by normal form, which is what
//! makes the factorial-size identity sums tractable.

use crate::backend::{BackendError, DeformationSpec};
use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use crate::shiftalg::GradedOperator;
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BracketError {
    #[error("even-order brackets need one weight per operand")]
    WeightsRequired,
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

// ---------------------------------------------------------------------
// Signs
// ---------------------------------------------------------------------

/// Levi-Civita sign of a permutation of 0..n (inversion parity).
pub fn levi_civita(perm: &[u8]) -> i8 {
    let mut inv = 0usize;
    for k in 0..perm.len() {
        for l in k + 1..perm.len() {
            if perm[l] < perm[k] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The two factors of the super permutation sign: the Levi-Civita symbol
/// and the Koszul parity factor (-1)^sum over inversions of the products
/// of the permuted operands' parities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KoszulSign {
    pub eps: i8,
    pub parity_factor: i8,
}

impl KoszulSign {
    pub fn combined(self) -> i8 {
        self.eps * self.parity_factor
    }
}

/// Sign attached to the arrangement A_{perm[0]} ... A_{perm[n-1]}, for
/// operand parities indexed by original position.
pub fn koszul_sign(perm: &[u8], parities: &[u8]) -> KoszulSign {
    let mut exp = 0u32;
    for k in 0..perm.len() {
        for l in k + 1..perm.len() {
            if perm[l] < perm[k] {
                exp += (parities[perm[k] as usize] * parities[perm[l] as usize]) as u32;
            }
        }
    }
    KoszulSign {
        eps: levi_civita(perm),
        parity_factor: if exp % 2 == 0 { 1 } else { -1 },
    }
}

/// The same sign accumulated one adjacent transposition at a time, with a
/// factor (-1)^(1 + |a||b|) per swap. A standing property test asserts that
/// the two conventions agree.
pub fn koszul_sign_bubble(perm: &[u8], parities: &[u8]) -> i8 {
    let mut p = perm.to_vec();
    let mut sign = 1i8;
    let n = p.len();
    for i in 0..n {
        for j in 0..n.saturating_sub(i + 1) {
            if p[j] > p[j + 1] {
                let pa = parities[p[j] as usize];
                let pb = parities[p[j + 1] as usize];
                if (1 + pa * pb) % 2 == 1 {
                    sign = -sign;
                }
                p.swap(j, j + 1);
            }
        }
    }
    sign
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u8>> {
    assert!(n <= 8, "permutation enumeration beyond 8 is not supported");
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    loop {
        out.push(cur.clone());
        // next_permutation in lex order
        let mut i = n.wrapping_sub(1);
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

// ---------------------------------------------------------------------
// Interning arena with memoized products
// ---------------------------------------------------------------------

/// Operators interned by normal form; ordered products and bracket values
/// are cached by id. The cache is shared across permutation blocks, so the
/// factorial sums reuse every repeated sub-product.
pub struct OpArena {
    inner: RwLock<ArenaInner>,
}

#[derive(Default)]
struct ArenaInner {
    ids: HashMap<Arc<GradedOperator>, u32>,
    ops: Vec<Arc<GradedOperator>>,
    products: HashMap<(u32, u32), u32>,
    brackets: HashMap<(Vec<u32>, Option<i64>), u32>,
}

impl Default for OpArena {
    fn default() -> Self {
        Self::new()
    }
}

impl OpArena {
    pub fn new() -> Self {
        OpArena {
            inner: RwLock::new(ArenaInner::default()),
        }
    }

    pub fn intern(&self, op: GradedOperator) -> u32 {
        {
            let g = self.inner.read().unwrap();
            if let Some(id) = g.ids.get(&op) {
                return *id;
            }
        }
        let mut g = self.inner.write().unwrap();
        if let Some(id) = g.ids.get(&op) {
            return *id;
        }
        let arc = Arc::new(op);
        let id = g.ops.len() as u32;
        g.ops.push(arc.clone());
        g.ids.insert(arc, id);
        id
    }

    pub fn get(&self, id: u32) -> Arc<GradedOperator> {
        self.inner.read().unwrap().ops[id as usize].clone()
    }

    /// Memoized composition x . y.
    pub fn compose(&self, x: u32, y: u32) -> u32 {
        {
            let g = self.inner.read().unwrap();
            if let Some(id) = g.products.get(&(x, y)) {
                return *id;
            }
        }
        let (ox, oy) = (self.get(x), self.get(y));
        let prod = ox.compose(&oy);
        let id = self.intern(prod);
        self.inner.write().unwrap().products.insert((x, y), id);
        id
    }

    /// Memoized left-fold product of a chain of ids.
    pub fn product_chain(&self, ids: &[u32]) -> u32 {
        assert!(!ids.is_empty());
        let mut acc = ids[0];
        for &next in &ids[1..] {
            acc = self.compose(acc, next);
        }
        acc
    }

    pub fn cache_stats(&self) -> (usize, usize) {
        let g = self.inner.read().unwrap();
        (g.ops.len(), g.products.len())
    }

    fn bracket_cached(&self, key: &(Vec<u32>, Option<i64>)) -> Option<u32> {
        self.inner.read().unwrap().brackets.get(key).copied()
    }

    fn bracket_store(&self, key: (Vec<u32>, Option<i64>), id: u32) {
        self.inner.write().unwrap().brackets.insert(key, id);
    }
}

/// Memoized n-bracket over interned operands. Identity checkers route
/// through this so repeated sub-brackets across permutations are computed
/// once.
pub fn n_bracket_ids(
    arena: &OpArena,
    spec: &DeformationSpec,
    ids: &[u32],
    prefactor_weight: Option<HalfInt>,
) -> Result<u32, BracketError> {
    let key = (ids.to_vec(), prefactor_weight.map(|h| h.halves()));
    if let Some(hit) = arena.bracket_cached(&key) {
        return Ok(hit);
    }
    let ops: Vec<GradedOperator> = ids.iter().map(|&i| (*arena.get(i)).clone()).collect();
    let out = n_bracket(
        arena,
        spec,
        &BracketInput {
            ops,
            weights: None,
            prefactor_weight,
        },
    )?;
    let id = arena.intern(out);
    arena.bracket_store(key, id);
    Ok(id)
}

// ---------------------------------------------------------------------
// The n-bracket
// ---------------------------------------------------------------------

/// Operands of one bracket evaluation. Weights (one per operand) feed the
/// even-order prefactor; identity checkers override the prefactor weight
/// with the total weight of the whole identity so that the deformed factor
/// is one constant across all nested brackets.
#[derive(Clone)]
pub struct BracketInput {
    pub ops: Vec<GradedOperator>,
    pub weights: Option<Vec<HalfInt>>,
    pub prefactor_weight: Option<HalfInt>,
}

impl BracketInput {
    pub fn new(ops: Vec<GradedOperator>) -> Self {
        BracketInput {
            ops,
            weights: None,
            prefactor_weight: None,
        }
    }

    pub fn with_weights(ops: Vec<GradedOperator>, weights: Vec<HalfInt>) -> Self {
        assert_eq!(ops.len(), weights.len());
        BracketInput {
            ops,
            weights: Some(weights),
            prefactor_weight: None,
        }
    }
}

fn half_scalar() -> Scalar {
    Scalar::from_rational(BigRational::new(BigInt::from(1), BigInt::from(2)))
}

/// The even-order prefactor (1/2)[-2M]/[-M], or 1 for odd order.
pub fn bracket_prefactor(
    spec: &DeformationSpec,
    n: usize,
    total_weight: Option<HalfInt>,
) -> Result<Scalar, BracketError> {
    if n % 2 == 1 {
        return Ok(Scalar::one());
    }
    let m = total_weight.ok_or(BracketError::WeightsRequired)?;
    let ratio = spec.prefactor_ratio(m)?;
    Ok(&ratio * &half_scalar())
}

/// Evaluate the super n-bracket exactly.
pub fn n_bracket(
    arena: &OpArena,
    spec: &DeformationSpec,
    input: &BracketInput,
) -> Result<GradedOperator, BracketError> {
    let n = input.ops.len();
    assert!(n >= 1, "empty bracket");
    let sig = input.ops[0].signature().clone();
    let parities: Vec<u8> = input.ops.iter().map(|o| o.parity()).collect();
    let pref_weight = input
        .prefactor_weight
        .or_else(|| input.weights.as_ref().map(|w| w.iter().copied().sum()));
    let pref = bracket_prefactor(spec, n, pref_weight)?;
    let ids: Vec<u32> = input.ops.iter().map(|o| arena.intern(o.clone())).collect();
    let perms = permutations(n);
    let chunk = 1 + perms.len() / 16;
    let partials: Vec<GradedOperator> = perms
        .par_chunks(chunk)
        .map(|block| {
            let mut acc = GradedOperator::zero(sig.clone());
            for perm in block {
                let sign = koszul_sign(perm, &parities).combined();
                let chain: Vec<u32> = perm.iter().map(|&k| ids[k as usize]).collect();
                let prod = arena.get(arena.product_chain(&chain));
                let term = if sign < 0 { prod.neg() } else { (*prod).clone() };
                acc = add_graded(acc, term);
            }
            acc
        })
        .collect();
    let mut total = GradedOperator::zero(sig);
    for p in partials {
        total = add_graded(total, p);
    }
    Ok(total.scale(&pref))
}

// Adds allowing either side to be the zero operator of indefinite parity.
fn add_graded(a: GradedOperator, b: GradedOperator) -> GradedOperator {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else {
        a.add(&b)
    }
}

/// Outcome of one identity evaluation: exact zero (or exact equality), or
/// the first differing normal-form term as witness.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub holds: bool,
    pub witness: Option<String>,
}

impl IdentityCheck {
    fn from_difference(diff: &GradedOperator) -> Self {
        if diff.is_zero() {
            IdentityCheck {
                holds: true,
                witness: None,
            }
        } else {
            let zero = GradedOperator::zero(diff.signature().clone());
            let d = diff.first_diff(&zero).expect("nonzero difference");
            IdentityCheck {
                holds: false,
                witness: Some(format!(
                    "cell ({},{}) offset {:?}: {}",
                    d.cell.0, d.cell.1, d.offset, d.lhs
                )),
            }
        }
    }
}

/// Deformed skew-symmetry: bracket(permuted operands) must equal the
/// Koszul sign times the original bracket.
pub fn check_skew(
    arena: &OpArena,
    spec: &DeformationSpec,
    input: &BracketInput,
    perm: &[u8],
) -> Result<IdentityCheck, BracketError> {
    let n = input.ops.len();
    assert_eq!(perm.len(), n, "permutation arity");
    let parities: Vec<u8> = input.ops.iter().map(|o| o.parity()).collect();
    let base = n_bracket(arena, spec, input)?;
    let permuted_ops: Vec<GradedOperator> = perm.iter().map(|&k| input.ops[k as usize].clone()).collect();
    let permuted = BracketInput {
        ops: permuted_ops,
        weights: input
            .weights
            .as_ref()
            .map(|w| perm.iter().map(|&k| w[k as usize]).collect()),
        prefactor_weight: input.prefactor_weight,
    };
    let lhs = n_bracket(arena, spec, &permuted)?;
    let sign = koszul_sign(perm, &parities).combined();
    let rhs = if sign < 0 { base.neg() } else { base };
    Ok(IdentityCheck::from_difference(&lhs.sub_or_other(&rhs)))
}

/// Generalized super Jacobi identity for even n: the Koszul-signed sum over
/// all (2n-1)! arrangements of [[A.., n of them], rest] vanishes. All
/// nested brackets take the prefactor at the identity's total weight, so
/// the deformed factor is a constant square and associativity decides the
/// identity.
pub fn check_gsji(
    arena: &OpArena,
    spec: &DeformationSpec,
    n: usize,
    ops: &[GradedOperator],
    weights: &[HalfInt],
) -> Result<IdentityCheck, BracketError> {
    if n % 2 != 0 {
        return Err(BracketError::Arity(format!(
            "the generalized super Jacobi identity needs even n, got {}",
            n
        )));
    }
    if ops.len() != 2 * n - 1 || weights.len() != ops.len() {
        return Err(BracketError::Arity(format!(
            "need 2n-1 = {} operands with weights, got {}",
            2 * n - 1,
            ops.len()
        )));
    }
    let total: HalfInt = weights.iter().copied().sum();
    let sig = ops[0].signature().clone();
    let parities: Vec<u8> = ops.iter().map(|o| o.parity()).collect();
    let ids: Vec<u32> = ops.iter().map(|o| arena.intern(o.clone())).collect();
    let perms = permutations(ops.len());
    let chunk = 1 + perms.len() / 64;
    // Count signed multiplicities per interned bracket value; distinct
    // values are far fewer than permutations, so the final sum is short.
    let partials: Result<Vec<HashMap<u32, i64>>, BracketError> = perms
        .par_chunks(chunk)
        .map(|block| {
            let mut counts: HashMap<u32, i64> = HashMap::new();
            for perm in block {
                let sign = koszul_sign(perm, &parities).combined() as i64;
                let inner_ids: Vec<u32> = perm[..n].iter().map(|&k| ids[k as usize]).collect();
                let inner = n_bracket_ids(arena, spec, &inner_ids, Some(total))?;
                let mut outer_ids = vec![inner];
                outer_ids.extend(perm[n..].iter().map(|&k| ids[k as usize]));
                let outer = n_bracket_ids(arena, spec, &outer_ids, Some(total))?;
                *counts.entry(outer).or_insert(0) += sign;
            }
            Ok(counts)
        })
        .collect();
    let mut counts: std::collections::BTreeMap<u32, i64> = std::collections::BTreeMap::new();
    for part in partials? {
        for (id, c) in part {
            *counts.entry(id).or_insert(0) += c;
        }
    }
    let mut sum = GradedOperator::zero(sig);
    for (id, c) in counts {
        if c != 0 {
            sum = add_graded(sum, arena.get(id).scale(&Scalar::from_int(c)));
        }
    }
    Ok(IdentityCheck::from_difference(&sum))
}

/// Generalized (super) Bremner identity for odd n, with 3n-3 permuted
/// operands and a fixed distinguished operand B. For all-even operands the
/// Koszul factor is trivial and this is the Bremner identity; mixed
/// parities exercise the super version. Odd brackets carry no prefactor.
pub fn check_gbi_gsbi(
    arena: &OpArena,
    spec: &DeformationSpec,
    n: usize,
    b: &GradedOperator,
    ops: &[GradedOperator],
) -> Result<IdentityCheck, BracketError> {
    if n % 2 != 1 {
        return Err(BracketError::Arity(format!(
            "the Bremner identities need odd n, got {}",
            n
        )));
    }
    if ops.len() != 3 * n - 3 {
        return Err(BracketError::Arity(format!(
            "need 3n-3 = {} permuted operands, got {}",
            3 * n - 3,
            ops.len()
        )));
    }
    let sig = b.signature().clone();
    let parities: Vec<u8> = ops.iter().map(|o| o.parity()).collect();
    let b_id = arena.intern(b.clone());
    let ids: Vec<u32> = ops.iter().map(|o| arena.intern(o.clone())).collect();
    let perms = permutations(ops.len());
    let chunk = 1 + perms.len() / 64;
    let partials: Result<Vec<HashMap<u32, i64>>, BracketError> = perms
        .par_chunks(chunk)
        .map(|block| {
            let mut counts: HashMap<u32, i64> = HashMap::new();
            for perm in block {
                let sign = koszul_sign(perm, &parities).combined();
                let pick = |range: std::ops::Range<usize>| -> Vec<u32> {
                    perm[range].iter().map(|&k| ids[k as usize]).collect()
                };
                // LHS: [[B, A_1..A_(n-1)], [A_n..A_(2n-1)], A_(2n)..].
                let mut in1 = vec![b_id];
                in1.extend(pick(0..n - 1));
                let lhs_in1 = n_bracket_ids(arena, spec, &in1, None)?;
                let lhs_in2 = n_bracket_ids(arena, spec, &pick(n - 1..2 * n - 1), None)?;
                let mut lout = vec![lhs_in1, lhs_in2];
                lout.extend(pick(2 * n - 1..3 * n - 3));
                let lhs = n_bracket_ids(arena, spec, &lout, None)?;
                // RHS: [[B, [A_1..A_n], A_(n+1)..A_(2n-2)], A_(2n-1)..].
                let rhs_inner = n_bracket_ids(arena, spec, &pick(0..n), None)?;
                let mut mid = vec![b_id, rhs_inner];
                mid.extend(pick(n..2 * n - 2));
                let rhs_mid = n_bracket_ids(arena, spec, &mid, None)?;
                let mut rout = vec![rhs_mid];
                rout.extend(pick(2 * n - 2..3 * n - 3));
                let rhs = n_bracket_ids(arena, spec, &rout, None)?;
                *counts.entry(lhs).or_insert(0) += sign as i64;
                *counts.entry(rhs).or_insert(0) -= sign as i64;
            }
            Ok(counts)
        })
        .collect();
    let mut counts: std::collections::BTreeMap<u32, i64> = std::collections::BTreeMap::new();
    for part in partials? {
        for (id, c) in part {
            *counts.entry(id).or_insert(0) += c;
        }
    }
    let mut sum = GradedOperator::zero(sig);
    for (id, c) in counts {
        if c != 0 {
            sum = add_graded(sum, arena.get(id).scale(&Scalar::from_int(c)));
        }
    }
    Ok(IdentityCheck::from_difference(&sum))
}

// ---------------------------------------------------------------------
// Distinguished-element expansions
// ---------------------------------------------------------------------

/// The bracket [B, A_1, ..., A_(n-1)] expanded by threading B through all
/// insertion positions of the antisymmetrized A-words:
/// sum_j (-1)^j sum_perm eps (-1)^(koszul + |B| (|A_(i_1)|+..+|A_(i_j)|))
///   A_(i_1)..A_(i_j) B A_(i_(j+1)).. A_(i_(n-1)).
pub fn bracket_with_distinguished(
    arena: &OpArena,
    spec: &DeformationSpec,
    b: &GradedOperator,
    ops: &[GradedOperator],
    z: Option<&GradedOperator>,
    prefactor_weight: Option<HalfInt>,
) -> Result<GradedOperator, BracketError> {
    let sig = b.signature().clone();
    let arity = 1 + ops.len() + z.map(|_| 1).unwrap_or(0);
    let pref = bracket_prefactor(spec, arity, prefactor_weight)?;
    let parities: Vec<u8> = ops.iter().map(|o| o.parity()).collect();
    let b_id = arena.intern(b.clone());
    let ids: Vec<u32> = ops.iter().map(|o| arena.intern(o.clone())).collect();
    let n = ops.len();
    let mut acc = GradedOperator::zero(sig.clone());
    match z {
        None => {
            for perm in permutations(n) {
                let ks = koszul_sign(&perm, &parities);
                for j in 0..=n {
                    let mut sign = ks.combined() * if j % 2 == 0 { 1 } else { -1 };
                    // B moves right past the first j permuted A's.
                    let passed: u8 = perm[..j]
                        .iter()
                        .map(|&k| parities[k as usize])
                        .sum::<u8>()
                        % 2;
                    if b.parity() * passed == 1 {
                        sign = -sign;
                    }
                    let mut chain: Vec<u32> = perm[..j].iter().map(|&k| ids[k as usize]).collect();
                    chain.push(b_id);
                    chain.extend(perm[j..].iter().map(|&k| ids[k as usize]));
                    let prod = arena.get(arena.product_chain(&chain));
                    let term = if sign < 0 { prod.neg() } else { (*prod).clone() };
                    acc = add_graded(acc, term);
                }
            }
        }
        Some(zop) => {
            let z_id = arena.intern(zop.clone());
            for perm in permutations(n) {
                let ks = koszul_sign(&perm, &parities);
                for j in 0..=n {
                    for k in 0..=(n - j) {
                        // Term 1: A..A_k B A.. A_(n-j) Z A..; B moved right
                        // past k A's, Z moved left from the end past the
                        // last j A's.
                        let base = ks.combined()
                            * if (j + k) % 2 == 0 { 1 } else { -1 };
                        let b_passed: u8 = perm[..k]
                            .iter()
                            .map(|&kk| parities[kk as usize])
                            .sum::<u8>()
                            % 2;
                        let z_passed: u8 = perm[n - j..]
                            .iter()
                            .map(|&kk| parities[kk as usize])
                            .sum::<u8>()
                            % 2;
                        let mut sign1 = base;
                        if b.parity() * b_passed == 1 {
                            sign1 = -sign1;
                        }
                        if zop.parity() * z_passed == 1 {
                            sign1 = -sign1;
                        }
                        let mut chain: Vec<u32> =
                            perm[..k].iter().map(|&kk| ids[kk as usize]).collect();
                        chain.push(b_id);
                        chain.extend(perm[k..n - j].iter().map(|&kk| ids[kk as usize]));
                        chain.push(z_id);
                        chain.extend(perm[n - j..].iter().map(|&kk| ids[kk as usize]));
                        let prod = arena.get(arena.product_chain(&chain));
                        let term = if sign1 < 0 { prod.neg() } else { (*prod).clone() };
                        acc = add_graded(acc, term);

                        // Term 2: the B <-> Z swapped word, subtracted; B
                        // moves past everything up to position n-j, Z past
                        // B and the A's after position k.
                        let b_passed2: u8 = perm[..n - j]
                            .iter()
                            .map(|&kk| parities[kk as usize])
                            .sum::<u8>()
                            % 2;
                        let z_passed2: u8 = perm[k..]
                            .iter()
                            .map(|&kk| parities[kk as usize])
                            .sum::<u8>()
                            % 2;
                        let mut sign2 = base;
                        if b.parity() * b_passed2 == 1 {
                            sign2 = -sign2;
                        }
                        if zop.parity() * ((z_passed2 + b.parity()) % 2) == 1 {
                            sign2 = -sign2;
                        }
                        let mut chain2: Vec<u32> =
                            perm[..k].iter().map(|&kk| ids[kk as usize]).collect();
                        chain2.push(z_id);
                        chain2.extend(perm[k..n - j].iter().map(|&kk| ids[kk as usize]));
                        chain2.push(b_id);
                        chain2.extend(perm[n - j..].iter().map(|&kk| ids[kk as usize]));
                        let prod2 = arena.get(arena.product_chain(&chain2));
                        let term2 = if sign2 < 0 { (*prod2).clone() } else { prod2.neg() };
                        acc = add_graded(acc, term2);
                    }
                }
            }
        }
    }
    Ok(acc.scale(&pref))
}

// ---------------------------------------------------------------------
// Fundamental-identity variants over any bracket algebra
// ---------------------------------------------------------------------

/// A module with an n-ary bracket: the operator algebra itself, or a
/// structure-constant algebra defined by catalog closed forms.
pub trait NAlgebra {
    type Elt: Clone;
    fn bracket(&self, args: &[Self::Elt]) -> Self::Elt;
    fn add(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt;
    fn neg(&self, a: &Self::Elt) -> Self::Elt;
    fn is_zero(&self, a: &Self::Elt) -> bool;
    fn parity(&self, a: &Self::Elt) -> u8;
    fn describe(&self, a: &Self::Elt) -> String;

    fn sub(&self, a: &Self::Elt, b: &Self::Elt) -> Self::Elt {
        self.add(a, &self.neg(b))
    }
}

/// The ternary fundamental identity
///   [A,B,[C,D,E]] = [[A,B,C],D,E]
///                 + (-1)^((|A|+|B|)|C|) [C,[A,B,D],E]
///                 + (-1)^((|A|+|B|)(|C|+|D|)) [C,D,[A,B,E]].
pub fn check_fi3<N: NAlgebra>(alg: &N, ops: &[N::Elt]) -> Result<IdentityCheck, BracketError> {
    if ops.len() != 5 {
        return Err(BracketError::Arity(format!(
            "the ternary fundamental identity takes 5 operands, got {}",
            ops.len()
        )));
    }
    let (a, b, c, d, e) = (&ops[0], &ops[1], &ops[2], &ops[3], &ops[4]);
    let pab = (alg.parity(a) + alg.parity(b)) % 2;
    let pc = alg.parity(c);
    let pd = alg.parity(d);
    let lhs = alg.bracket(&[a.clone(), b.clone(), alg.bracket(&[c.clone(), d.clone(), e.clone()])]);
    let t1 = alg.bracket(&[alg.bracket(&[a.clone(), b.clone(), c.clone()]), d.clone(), e.clone()]);
    let mut t2 = alg.bracket(&[c.clone(), alg.bracket(&[a.clone(), b.clone(), d.clone()]), e.clone()]);
    if pab * pc == 1 {
        t2 = alg.neg(&t2);
    }
    let mut t3 = alg.bracket(&[c.clone(), d.clone(), alg.bracket(&[a.clone(), b.clone(), e.clone()])]);
    if pab * ((pc + pd) % 2) == 1 {
        t3 = alg.neg(&t3);
    }
    let rhs = alg.add(&alg.add(&t1, &t2), &t3);
    let diff = alg.sub(&lhs, &rhs);
    Ok(if alg.is_zero(&diff) {
        IdentityCheck {
            holds: true,
            witness: None,
        }
    } else {
        IdentityCheck {
            holds: false,
            witness: Some(alg.describe(&diff)),
        }
    })
}

/// The super fundamental identity for a bracket of even arity N, with
/// 2N-1 operands:
///   [A_1..A_(N-1), [A_N..A_(2N-1)]]
///     = sum_(i=0)^(N-1) (-1)^((|A_N|+..+|A_(N-1+i)|)(|A_1|+..+|A_(N-1)|))
///       [A_N..A_(N-1+i), [A_1..A_(N-1), A_(N+i)], A_(N+i+1)..A_(2N-1)].
pub fn check_fi_2n<N: NAlgebra>(
    alg: &N,
    arity: usize,
    ops: &[N::Elt],
) -> Result<IdentityCheck, BracketError> {
    let n = arity;
    if ops.len() != 2 * n - 1 {
        return Err(BracketError::Arity(format!(
            "the order-{} fundamental identity takes {} operands, got {}",
            n,
            2 * n - 1,
            ops.len()
        )));
    }
    let head_parity: u8 = ops[..n - 1].iter().map(|o| alg.parity(o)).sum::<u8>() % 2;
    let mut lhs_args: Vec<N::Elt> = ops[..n - 1].to_vec();
    lhs_args.push(alg.bracket(&ops[n - 1..]));
    let lhs = alg.bracket(&lhs_args);
    let mut rhs: Option<N::Elt> = None;
    for i in 0..n {
        let passed: u8 = ops[n - 1..n - 1 + i]
            .iter()
            .map(|o| alg.parity(o))
            .sum::<u8>()
            % 2;
        let mut inner_args: Vec<N::Elt> = ops[..n - 1].to_vec();
        inner_args.push(ops[n - 1 + i].clone());
        let inner = alg.bracket(&inner_args);
        let mut args: Vec<N::Elt> = ops[n - 1..n - 1 + i].to_vec();
        args.push(inner);
        args.extend(ops[n + i..].iter().cloned());
        let mut term = alg.bracket(&args);
        if passed * head_parity == 1 {
            term = alg.neg(&term);
        }
        rhs = Some(match rhs {
            None => term,
            Some(r) => alg.add(&r, &term),
        });
    }
    let diff = alg.sub(&lhs, &rhs.expect("n >= 1"));
    Ok(if alg.is_zero(&diff) {
        IdentityCheck {
            holds: true,
            witness: None,
        }
    } else {
        IdentityCheck {
            holds: false,
            witness: Some(alg.describe(&diff)),
        }
    })
}

// GradedOperator helper used by the checkers: subtraction that tolerates
// the zero operator's indefinite parity.
trait SubOrOther {
    fn sub_or_other(&self, other: &Self) -> Self;
}

impl SubOrOther for GradedOperator {
    fn sub_or_other(&self, other: &GradedOperator) -> GradedOperator {
        if other.is_zero() {
            self.clone()
        } else if self.is_zero() {
            other.neg()
        } else {
            self.sub(other)
        }
    }
}

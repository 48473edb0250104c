//! Closed-form right-hand sides for the relation families, assembled from
//! structure constants, deformed numbers and generator constructors.
//!
//! Three documented repairs (each with a paper-literal toggle) are applied
//! by default:
//!   1. summation-variable power factors printed outside their sums are
//!      moved inside (paper-literal pins them at the upper bound);
//!   2. the second sum of the W-commutator structure constant runs to
//!      r2-1, not r1-1;
//!   3. the n-algebra right side's undefined exponents are generated by
//!      iterating the derived normal-ordering rule instead.

use crate::backend::{BackendError, DeformationSpec};
use crate::generators::{make_virasoro, make_w, GeneratorId, WKind};
use crate::halfint::HalfInt;
use crate::scalar::Scalar;
use crate::shiftalg::abasis::{normal_order_rule, ProjectionError};
use crate::shiftalg::{CoeffFn, GradedOperator, SpaceSignature};
use std::collections::{BTreeMap, HashMap};

/// Repair toggles; `default()` is the repaired form, `paper_literal()`
/// evaluates the formulas exactly as printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepairFlags {
    /// Move the p^k / p^alpha factor inside its sum.
    pub sum_factor_inside: bool,
    /// Bound the swapped sum of the structure constant by r2-1.
    pub swapped_sum_bound: bool,
    /// Derive the n-algebra exponents from the normal-ordering rule.
    pub nalg_derived: bool,
}

impl Default for RepairFlags {
    fn default() -> Self {
        RepairFlags {
            sum_factor_inside: true,
            swapped_sum_bound: true,
            nalg_derived: true,
        }
    }
}

impl RepairFlags {
    pub fn paper_literal() -> Self {
        RepairFlags {
            sum_factor_inside: false,
            swapped_sum_bound: false,
            nalg_derived: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RhsError {
    #[error("backend cannot realize the right-hand side: {0}")]
    Backend(#[from] BackendError),
    #[error("right-hand side references an undefined generator: {0}")]
    UndefinedGenerator(String),
    #[error("no scalar-coefficient closure in this backend: {0}")]
    NoClosure(String),
    #[error("paper-literal form has no defined value: {0}")]
    LiteralUndefined(String),
}

/// The explicit q^e factor of the printed formulas; the classical backend
/// specializes q to 1.
fn q_factor(spec: &DeformationSpec, e: i64) -> Scalar {
    match spec.form {
        crate::backend::RForm::Classical => Scalar::one(),
        _ => Scalar::q_pow(HalfInt::from_int(e)),
    }
}

/// The explicit p^k factor (or its paper-literal pin at the sum's bound);
/// the classical and q backends specialize p to 1.
fn p_power(spec: &DeformationSpec, repairs: &RepairFlags, k: u32, bound: u32) -> Scalar {
    match spec.form {
        crate::backend::RForm::Classical | crate::backend::RForm::Q => Scalar::one(),
        _ => {
            let e = if repairs.sum_factor_inside { k } else { bound };
            Scalar::p_pow(HalfInt::from_int(e as i64))
        }
    }
}

/// One term family of the Virasoro commutation relations:
///   sum_k (-1)^k lambda^(k + off) p^k q^((bound-k)*arg) C^k_bound A^k_arg
/// given as the list of (k, scalar) pairs.
fn shov_sum(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    bound: u32,
    arg: i64,
    lambda_off_halves: i64,
) -> Vec<(u32, Scalar)> {
    let mut out = Vec::new();
    for k in 0..=bound {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let mut c = Scalar::from_int(sign);
        c = &c * &Scalar::lambda_pow(HalfInt::new(2 * k as i64 + lambda_off_halves));
        c = &c * &p_power(spec, repairs, k, bound);
        c = &c * &q_factor(spec, (bound - k) as i64 * arg);
        c = &c * &spec.deformed_binomial(bound, k).expect("k <= bound");
        c = &c * &spec.falling_factorial(HalfInt::from_int(arg), k);
        if !c.is_zero() {
            out.push((k, c));
        }
    }
    out
}

/// The Virasoro generator flavors a relation can target.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VirFlavor {
    L,
    Lbar,
    H,
    Hbar,
}

impl VirFlavor {
    pub fn id(self, mode: i64, depth: u32) -> GeneratorId {
        match self {
            VirFlavor::L => GeneratorId::VirL { m: mode, s: depth },
            VirFlavor::Lbar => GeneratorId::VirLbar { m: mode, s: depth },
            VirFlavor::H => GeneratorId::VirH { r: mode, alpha: depth },
            VirFlavor::Hbar => GeneratorId::VirHbar { r: mode, alpha: depth },
        }
    }
}

fn vir_op(
    spec: &DeformationSpec,
    flavor: VirFlavor,
    mode: i64,
    depth: u32,
    k_fn: Option<&CoeffFn>,
) -> Result<GradedOperator, RhsError> {
    let id = flavor.id(mode, depth);
    let (m, d) = match id {
        GeneratorId::VirL { m, s } | GeneratorId::VirLbar { m, s } => (m, s),
        GeneratorId::VirH { r, alpha } | GeneratorId::VirHbar { r, alpha } => (r, alpha),
        _ => unreachable!(),
    };
    make_virasoro(id, m, d, spec, k_fn).map_err(|e| match e {
        crate::generators::GenError::Backend(b) => RhsError::Backend(b),
        other => RhsError::UndefinedGenerator(other.to_string()),
    })
}

/// Accumulate coeff * op into an optional sum (handles the zero operator).
fn acc(sum: &mut Option<GradedOperator>, coeff: &Scalar, op: GradedOperator) {
    if coeff.is_zero() {
        return;
    }
    let term = op.scale(coeff);
    if term.is_zero() {
        return;
    }
    *sum = Some(match sum.take() {
        None => term,
        Some(s) => s.add(&term),
    });
}

fn finish(sum: Option<GradedOperator>, sig: std::sync::Arc<SpaceSignature>) -> GradedOperator {
    sum.unwrap_or_else(|| GradedOperator::zero(sig))
}

/// Expected right side of the two-generator Virasoro relations; `fam` is
/// 1-9 as in the catalog ids.
pub fn shov_rhs(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    fam: u8,
    params: &BTreeMap<String, i64>,
    k_fn: Option<&CoeffFn>,
) -> Result<GradedOperator, RhsError> {
    let get = |k: &str| params[k];
    let mut sum: Option<GradedOperator> = None;
    let sig = SpaceSignature::z_space();
    match fam {
        // [L^s_m, L^r_n] and [L^s_m, Lbar^r_n]
        1 | 2 => {
            let (s, r, m, n) = (get("s") as u32, get("r") as u32, get("m"), get("n"));
            let flavor = if fam == 1 { VirFlavor::L } else { VirFlavor::Lbar };
            for (k, c) in shov_sum(spec, repairs, s, n + r as i64, -1) {
                acc(&mut sum, &c, vir_op(spec, flavor, m + n, s + r - k, k_fn)?);
            }
            for (k, c) in shov_sum(spec, repairs, r, m + s as i64, -1) {
                acc(&mut sum, &-c, vir_op(spec, flavor, m + n, s + r - k, k_fn)?);
            }
        }
        // [L^s_m, H^(a+1/2)_r] and [L^s_m, Hbar^(a+1/2)_r]
        3 | 4 => {
            let (s, alpha, m, r) = (get("s") as u32, get("alpha") as u32, get("m"), get("r"));
            let flavor = if fam == 3 { VirFlavor::H } else { VirFlavor::Hbar };
            for (k, c) in shov_sum(spec, repairs, s, r + alpha as i64, -1) {
                acc(&mut sum, &c, vir_op(spec, flavor, m + r, alpha + s - k, k_fn)?);
            }
            for (k, c) in shov_sum(spec, repairs, alpha, m + s as i64, -1) {
                acc(&mut sum, &-c, vir_op(spec, flavor, m + r, alpha + s - k, k_fn)?);
            }
        }
        // [Lbar^s_m, H^(a+1/2)_r]: one sum, overall minus, lambda^(k+3/2).
        5 => {
            let (s, alpha, m, r) = (get("s") as u32, get("alpha") as u32, get("m"), get("r"));
            for (k, c) in shov_sum(spec, repairs, alpha, m + s as i64, 3) {
                acc(&mut sum, &-c, vir_op(spec, VirFlavor::H, m + r, alpha + s - k, k_fn)?);
            }
        }
        // [Lbar^s_m, Lbar^r_n]
        6 => {
            let (s, r, m, n) = (get("s") as u32, get("r") as u32, get("m"), get("n"));
            for (k, c) in shov_sum(spec, repairs, s, n + r as i64, 3) {
                acc(&mut sum, &c, vir_op(spec, VirFlavor::Lbar, m + n, s + r - k, k_fn)?);
            }
            for (k, c) in shov_sum(spec, repairs, r, m + s as i64, 3) {
                acc(&mut sum, &-c, vir_op(spec, VirFlavor::Lbar, m + n, s + r - k, k_fn)?);
            }
        }
        // [Lbar^s_m, Hbar^(a+1/2)_r]: one sum, plus, lambda^(k+3/2).
        7 => {
            let (s, alpha, m, r) = (get("s") as u32, get("alpha") as u32, get("m"), get("r"));
            for (k, c) in shov_sum(spec, repairs, s, r + alpha as i64, 3) {
                acc(&mut sum, &c, vir_op(spec, VirFlavor::Hbar, m + r, alpha + s - k, k_fn)?);
            }
        }
        // {H^(a+1/2)_r, Hbar^(b+1/2)_s}
        8 => {
            let (alpha, beta, r, s) = (get("alpha") as u32, get("beta") as u32, get("r"), get("s"));
            for (k, c) in shov_sum(spec, repairs, alpha, s + beta as i64, 3) {
                acc(&mut sum, &c, vir_op(spec, VirFlavor::L, r + s, alpha + beta - k, k_fn)?);
            }
            for (k, c) in shov_sum(spec, repairs, beta, r + alpha as i64, -1) {
                acc(&mut sum, &c, vir_op(spec, VirFlavor::Lbar, r + s, alpha + beta - k, k_fn)?);
            }
            for (k, c) in shov_sum(spec, repairs, alpha, s + beta as i64, -1) {
                acc(&mut sum, &-c, vir_op(spec, VirFlavor::Lbar, r + s, alpha + beta - k, k_fn)?);
            }
        }
        // {Hbar, Hbar} = 0
        9 => {}
        _ => unreachable!("shov family 1-9"),
    }
    Ok(finish(sum, sig))
}

/// The triple-product groups of the three-generator Virasoro relations:
/// (S(e1; x1) - S(e2; x2)) (X) T(e1+e2-i; y), with the (-1)^(i+j)
/// lambda^(i+j+loff) factor applied per (i, j).
struct LimGroup {
    e1: u32,
    x1: i64,
    e2: u32,
    x2: i64,
    y: i64,
    /// Extra overall sign for the group.
    negate: bool,
}

fn lim_terms(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    group: &LimGroup,
    lambda_off_halves: i64,
) -> Vec<(u32, Scalar)> {
    // Returns (i + j, coefficient) pairs; the caller attaches depth
    // D - i - j.
    let mut out: Vec<(u32, Scalar)> = Vec::new();
    let e12 = group.e1 + group.e2;
    let mut push = |i: u32, s_coeff: Scalar| {
        // T(e1+e2-i; y) over j.
        let tb = e12 - i;
        for j in 0..=tb {
            let mut c = s_coeff.clone();
            c = &c * &p_power(spec, repairs, j, tb);
            c = &c * &q_factor(spec, (tb - j) as i64 * group.y);
            c = &c * &spec.deformed_binomial(tb, j).expect("j <= tb");
            c = &c * &spec.falling_factorial(HalfInt::from_int(group.y), j);
            // (-1)^(i+j) lambda^(i+j+loff)
            let w = i + j;
            if w % 2 == 1 {
                c = -c;
            }
            c = &c * &Scalar::lambda_pow(HalfInt::new(2 * w as i64 + lambda_off_halves));
            if group.negate {
                c = -c;
            }
            if !c.is_zero() {
                out.push((w, c));
            }
        }
    };
    for i in 0..=group.e1 {
        let mut s = Scalar::one();
        s = &s * &p_power(spec, repairs, i, group.e1);
        s = &s * &q_factor(spec, (group.e1 - i) as i64 * group.x1);
        s = &s * &spec.deformed_binomial(group.e1, i).expect("i <= e1");
        s = &s * &spec.falling_factorial(HalfInt::from_int(group.x1), i);
        push(i, s);
    }
    for i in 0..=group.e2 {
        let mut s = Scalar::one();
        s = &s * &p_power(spec, repairs, i, group.e2);
        s = &s * &q_factor(spec, (group.e2 - i) as i64 * group.x2);
        s = &s * &spec.deformed_binomial(group.e2, i).expect("i <= e2");
        s = &s * &spec.falling_factorial(HalfInt::from_int(group.x2), i);
        push(i, -s);
    }
    out
}

/// Expected right side of the three-generator Virasoro relations (the
/// 3-bracket family), fam 1-5.
pub fn lim_rhs(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    fam: u8,
    params: &BTreeMap<String, i64>,
    k_fn: Option<&CoeffFn>,
) -> Result<GradedOperator, RhsError> {
    let get = |k: &str| params[k];
    let sig = SpaceSignature::z_space();
    let mut sum: Option<GradedOperator> = None;
    match fam {
        // [L^s_m, L^r_n, L^h_k] -> L (fam 1) / with Lbar^h_k -> Lbar (fam 2)
        1 | 2 => {
            let (s, r, h) = (get("s") as u32, get("r") as u32, get("h") as u32);
            let (m, n, k) = (get("m"), get("n"), get("k"));
            let d = s + r + h;
            let mode = m + n + k;
            let flavor = if fam == 1 { VirFlavor::L } else { VirFlavor::Lbar };
            let groups = [
                LimGroup { e1: s, x1: n + r as i64, e2: r, x2: m + s as i64, y: k + h as i64, negate: false },
                LimGroup { e1: r, x1: k + h as i64, e2: h, x2: n + r as i64, y: m + s as i64, negate: false },
                LimGroup { e1: h, x1: m + s as i64, e2: s, x2: k + h as i64, y: n + r as i64, negate: false },
            ];
            for g in &groups {
                for (w, c) in lim_terms(spec, repairs, g, -2) {
                    if w > d {
                        continue;
                    }
                    acc(&mut sum, &c, vir_op(spec, flavor, mode, d - w, k_fn)?);
                }
            }
        }
        // [L^s_m, L^t_n, H^(a+1/2)_r] -> H (fam 3) / Hbar (fam 4)
        3 | 4 => {
            let (s, t, alpha) = (get("s") as u32, get("t") as u32, get("alpha") as u32);
            let (m, n, r) = (get("m"), get("n"), get("r"));
            let d = s + t + alpha;
            let mode = m + n + r;
            let flavor = if fam == 3 { VirFlavor::H } else { VirFlavor::Hbar };
            let groups = [
                LimGroup { e1: s, x1: n + t as i64, e2: t, x2: m + s as i64, y: r + alpha as i64, negate: false },
                LimGroup { e1: t, x1: r + alpha as i64, e2: alpha, x2: n + t as i64, y: m + s as i64, negate: false },
                LimGroup { e1: alpha, x1: m + s as i64, e2: s, x2: r + alpha as i64, y: n + t as i64, negate: false },
            ];
            for g in &groups {
                for (w, c) in lim_terms(spec, repairs, g, -2) {
                    if w > d {
                        continue;
                    }
                    acc(&mut sum, &c, vir_op(spec, flavor, mode, d - w, k_fn)?);
                }
            }
        }
        // [L^k_m, H^(a+1/2)_r, Hbar^(b+1/2)_s] -> L and Lbar parts.
        5 => {
            let (kd, alpha, beta) = (get("k") as u32, get("alpha") as u32, get("beta") as u32);
            let (m, r, s) = (get("m"), get("r"), get("s"));
            let d = kd + alpha + beta;
            let mode = m + r + s;
            // L part, lambda^(i+j+1).
            let lg = LimGroup {
                e1: kd,
                x1: r + alpha as i64,
                e2: alpha,
                x2: m + kd as i64,
                y: s + beta as i64,
                negate: false,
            };
            for (w, c) in lim_terms(spec, repairs, &lg, 2) {
                if w > d {
                    continue;
                }
                acc(&mut sum, &c, vir_op(spec, VirFlavor::L, mode, d - w, k_fn)?);
            }
            // The plus double sum: S-full(alpha; s+beta) (X) T(alpha+beta-i; m+k).
            for i in 0..=alpha {
                let mut s0 = Scalar::one();
                s0 = &s0 * &p_power(spec, repairs, i, alpha);
                s0 = &s0 * &q_factor(spec, (alpha - i) as i64 * (s + beta as i64));
                s0 = &s0 * &spec.deformed_binomial(alpha, i).expect("i <= alpha");
                s0 = &s0 * &spec.falling_factorial(HalfInt::from_int(s + beta as i64), i);
                let tb = alpha + beta - i;
                for j in 0..=tb {
                    let mut c = s0.clone();
                    c = &c * &p_power(spec, repairs, j, tb);
                    c = &c * &q_factor(spec, (tb - j) as i64 * (m + kd as i64));
                    c = &c * &spec.deformed_binomial(tb, j).expect("j <= tb");
                    c = &c * &spec.falling_factorial(HalfInt::from_int(m + kd as i64), j);
                    let w = i + j;
                    if w % 2 == 1 {
                        c = -c;
                    }
                    c = &c * &Scalar::lambda_pow(HalfInt::new(2 * w as i64 + 2));
                    if w <= d && !c.is_zero() {
                        acc(&mut sum, &c, vir_op(spec, VirFlavor::L, mode, d - w, k_fn)?);
                    }
                }
            }
            // Lbar part, lambda^(i+j-1).
            let groups = [
                LimGroup { e1: kd, x1: r + alpha as i64, e2: alpha, x2: m + kd as i64, y: s + beta as i64, negate: true },
                LimGroup { e1: beta, x1: r + alpha as i64, e2: alpha, x2: s + beta as i64, y: m + kd as i64, negate: false },
                LimGroup { e1: beta, x1: m + kd as i64, e2: kd, x2: s + beta as i64, y: r + alpha as i64, negate: true },
            ];
            for g in &groups {
                for (w, c) in lim_terms(spec, repairs, g, -2) {
                    if w > d {
                        continue;
                    }
                    acc(&mut sum, &c, vir_op(spec, VirFlavor::Lbar, mode, d - w, k_fn)?);
                }
            }
        }
        _ => unreachable!("lim family 1-5"),
    }
    Ok(finish(sum, sig))
}

/// The lambda-limit closed forms: coefficient times a single generator of
/// depth D-1 (fam 1-5 mirror the 3-bracket families).
pub fn alg3_rhs(
    spec: &DeformationSpec,
    fam: u8,
    params: &BTreeMap<String, i64>,
    k_fn: Option<&CoeffFn>,
) -> Result<GradedOperator, RhsError> {
    let get = |k: &str| params[k];
    let num = |x: i64| spec.deformed_number(HalfInt::from_int(x));
    let qp = |e: i64| q_factor(spec, e);
    let sig = SpaceSignature::z_space();
    // The six-term coefficient q^((a-1)b) [a][b] - ... shared by fams 1-4.
    let six = |e1: i64, e2: i64, e3: i64, x12: i64, x23: i64, x31: i64| -> Scalar {
        // pattern: q^((e1-1)x23)[e1][x23] - q^((e2-1)x12)[e2][x12]
        //        + q^((e2-1)x31)[e2][x31] - q^((e3-1)x23)[e3][x23]
        //        + q^((e3-1)x12)[e3][x12] - q^((e1-1)x31)[e1][x31]
        let t = |a: i64, b: i64| -> Scalar { &(&qp((a - 1) * b) * &num(a)) * &num(b) };
        let mut c = t(e1, x23);
        c = &c - &t(e2, x12);
        c = &c + &t(e2, x31);
        c = &c - &t(e3, x23);
        c = &c + &t(e3, x12);
        c = &c - &t(e1, x31);
        c
    };
    let (coeff, flavor, mode, depth): (Scalar, VirFlavor, i64, i64) = match fam {
        1 | 2 => {
            let (s, r, h) = (get("s"), get("r"), get("h"));
            let (m, n, k) = (get("m"), get("n"), get("k"));
            let c = six(s, r, h, m + s, n + r, k + h);
            (
                c,
                if fam == 1 { VirFlavor::L } else { VirFlavor::Lbar },
                m + n + k,
                s + r + h - 1,
            )
        }
        3 | 4 => {
            let (s, t, alpha) = (get("s"), get("t"), get("alpha"));
            let (m, n, r) = (get("m"), get("n"), get("r"));
            let c = six(s, t, alpha, m + s, n + t, r + alpha);
            (
                c,
                if fam == 3 { VirFlavor::H } else { VirFlavor::Hbar },
                m + n + r,
                s + t + alpha - 1,
            )
        }
        5 => {
            let (kd, alpha, beta) = (get("k"), get("alpha"), get("beta"));
            let (m, r, s) = (get("m"), get("r"), get("s"));
            let t = |a: i64, b: i64| -> Scalar { &(&qp((a - 1) * b) * &num(a)) * &num(b) };
            let mut c = -&t(kd, r + alpha);
            c = &c + &t(alpha, m + kd);
            c = &c + &t(beta, r + alpha);
            c = &c - &t(alpha, s + beta);
            c = &c - &t(beta, m + kd);
            c = &c + &t(kd, s + beta);
            (c, VirFlavor::Lbar, m + r + s, kd + alpha + beta - 1)
        }
        _ => unreachable!("alg3 family 1-5"),
    };
    if coeff.is_zero() {
        return Ok(GradedOperator::zero(sig));
    }
    if depth < 0 {
        return Err(RhsError::UndefinedGenerator(format!(
            "lambda-limit generator depth {} is negative with a nonzero coefficient",
            depth
        )));
    }
    Ok(vir_op(spec, flavor, mode, depth as u32, k_fn)?.scale(&coeff))
}

// ---------------------------------------------------------------------
// W-algebra families
// ---------------------------------------------------------------------

/// The structure-constant term list f^{m1,r1}_{m2,r2}: pairs (alpha1,
/// coefficient) attached to the target W_{m1+m2, r1+r2-1-alpha1}.
pub fn structure_f(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    m1: i64,
    r1: u32,
    m2: i64,
    r2: u32,
) -> Vec<(u32, Scalar)> {
    let mut terms: BTreeMap<u32, Scalar> = BTreeMap::new();
    let first_bound = r1 - 1;
    for a in 0..=first_bound {
        let mut c = p_power(spec, repairs, a, first_bound);
        c = &c * &q_factor(spec, (first_bound - a) as i64 * (m2 + r2 as i64 - 1));
        c = &c * &spec.deformed_binomial(first_bound, a).expect("a <= bound");
        c = &c * &spec.falling_factorial(HalfInt::from_int(m2 + r2 as i64 - 1), a);
        if !c.is_zero() {
            let e = terms.entry(a).or_insert_with(Scalar::zero);
            *e = &*e + &c;
        }
    }
    // The swapped term; the repaired bound is r2-1, the literal one r1-1.
    let second_bound = if repairs.swapped_sum_bound { r2 - 1 } else { r1 - 1 };
    for a in 0..=second_bound {
        let mut c = p_power(spec, repairs, a, second_bound);
        c = &c * &q_factor(spec, (r2 as i64 - 1 - a as i64) * (m1 + r1 as i64 - 1));
        c = &c * &spec.binomial_or_zero(r2 as i64 - 1, a as i64);
        c = &c * &spec.falling_factorial(HalfInt::from_int(m1 + r1 as i64 - 1), a);
        if !c.is_zero() {
            let e = terms.entry(a).or_insert_with(Scalar::zero);
            *e = &*e - &c;
        }
    }
    terms.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// A signed sum of W-operators; errors when a nonzero coefficient lands on
/// an undefined generator.
pub fn w_sum(
    spec: &DeformationSpec,
    terms: &[(WKind, i64, i64, Scalar)],
) -> Result<GradedOperator, RhsError> {
    let sig = SpaceSignature::landau();
    let mut sum: Option<GradedOperator> = None;
    for (kind, m, r, c) in terms {
        if c.is_zero() {
            continue;
        }
        if *r < 1 || m + r < 1 {
            return Err(RhsError::UndefinedGenerator(format!(
                "W(m={}, r={}) with nonzero coefficient {}",
                m, r, c
            )));
        }
        let op = make_w(*kind, *m, *r as u32, spec)
            .map_err(|e| RhsError::UndefinedGenerator(e.to_string()))?;
        acc(&mut sum, c, op);
    }
    Ok(finish(sum, sig))
}

/// Expected right sides of the W-pair commutators, variant 1-10:
/// 1 [B,B], 2 [B,Bbar], 3 [B,F], 4 [B,Fbar], 5 [Bbar,Bbar], 6 {F,F},
/// 7 {Fbar,Fbar}, 8 [Bbar,F], 9 [Bbar,Fbar], 10 {F,Fbar}.
pub fn w2_rhs(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    variant: u8,
    m1: i64,
    r1: u32,
    m2: i64,
    r2: u32,
) -> Result<GradedOperator, RhsError> {
    let mbar = m1 + m2;
    let rbar = |a: u32| r1 as i64 + r2 as i64 - 1 - a as i64;
    let f = structure_f(spec, repairs, m1, r1, m2, r2);
    let with_kind = |kind: WKind| -> Vec<(WKind, i64, i64, Scalar)> {
        f.iter()
            .map(|(a, c)| (kind, mbar, rbar(*a), c.clone()))
            .collect()
    };
    // The one-sided expansion sums of relations 33-35.
    let one_sided = |bound_r: u32, arg_m: i64, arg_r: u32| -> Vec<(u32, Scalar)> {
        let bound = bound_r - 1;
        let x = arg_m + arg_r as i64 - 1;
        let mut out = Vec::new();
        for a in 0..=bound {
            let mut c = p_power(spec, repairs, a, bound);
            c = &c * &q_factor(spec, (bound - a) as i64 * x);
            c = &c * &spec.deformed_binomial(bound, a).expect("a <= bound");
            c = &c * &spec.falling_factorial(HalfInt::from_int(x), a);
            if !c.is_zero() {
                out.push((a, c));
            }
        }
        out
    };
    match variant {
        1 => w_sum(spec, &with_kind(WKind::B)),
        2 => w_sum(spec, &with_kind(WKind::Bbar)),
        3 => w_sum(spec, &with_kind(WKind::F)),
        4 => w_sum(spec, &with_kind(WKind::Fbar)),
        5 => w_sum(spec, &with_kind(WKind::Bbar)),
        6 | 7 => Ok(GradedOperator::zero(SpaceSignature::landau())),
        8 => {
            // [Wbar^B, W^F] = -sum over r2-1 with A at m1+r1-1, target W^F.
            let terms: Vec<_> = one_sided(r2, m1, r1)
                .into_iter()
                .map(|(a, c)| (WKind::F, mbar, rbar(a), -c))
                .collect();
            w_sum(spec, &terms)
        }
        9 => {
            // [Wbar^B, Wbar^F] = +sum over r1-1 with A at m2+r2-1.
            let terms: Vec<_> = one_sided(r1, m2, r2)
                .into_iter()
                .map(|(a, c)| (WKind::Fbar, mbar, rbar(a), c))
                .collect();
            w_sum(spec, &terms)
        }
        10 => {
            // {W^F, Wbar^F} = sum(B) - f(Bbar).
            let mut terms: Vec<_> = one_sided(r1, m2, r2)
                .into_iter()
                .map(|(a, c)| (WKind::B, mbar, rbar(a), c))
                .collect();
            terms.extend(f.iter().map(|(a, c)| (WKind::Bbar, mbar, rbar(*a), -c.clone())));
            w_sum(spec, &terms)
        }
        _ => unreachable!("w2 variant 1-10"),
    }
}

/// Vandermonde coefficient: the product over j < k of [m_k] - [m_j].
pub fn vandermonde(spec: &DeformationSpec, modes: &[i64]) -> Scalar {
    let mut c = Scalar::one();
    for k in 1..modes.len() {
        for j in 0..k {
            let d = &spec.deformed_number(HalfInt::from_int(modes[k]))
                - &spec.deformed_number(HalfInt::from_int(modes[j]));
            if d.is_zero() {
                return Scalar::zero();
            }
            c = &c * &d;
        }
    }
    c
}

/// The rescaling coefficient Q: the Levi-Civita-signed sum over the
/// permutation group S_(2n-1) of products of deformed binomials with the
/// cumulative bounds beta_k = k*n - sum of the earlier entries.
pub fn normalizer_q(spec: &DeformationSpec, n: u32) -> Scalar {
    let size = (2 * n - 1) as usize;
    let perms = crate::brackets::permutations(size);
    let mut total = Scalar::zero();
    for perm in &perms {
        let sign = crate::brackets::levi_civita(perm);
        let mut prod = Scalar::one();
        let mut alpha_sum: i64 = 0;
        for (k, &akm1) in perm.iter().enumerate() {
            // alpha_k is the permutation entry as a member of {1..2n-1}.
            let alpha_k = akm1 as i64 + 1;
            let beta_k = (k as i64 + 1) * n as i64 - alpha_sum;
            prod = &prod * &spec.binomial_or_zero(beta_k, alpha_k);
            if prod.is_zero() {
                break;
            }
            alpha_sum += alpha_k;
        }
        if prod.is_zero() {
            continue;
        }
        if sign < 0 {
            total = &total - &prod;
        } else {
            total = &total + &prod;
        }
    }
    total
}

/// Eq.-47-style right side: (V_2n / 2) * ratio * W_(sum m, n+1), optionally
/// rescaled by the normalizer.
pub fn sub2n_rhs(
    spec: &DeformationSpec,
    n: u32,
    modes: &[i64],
    last_fermionic: bool,
    rescaled: bool,
) -> Result<GradedOperator, RhsError> {
    assert_eq!(modes.len(), 2 * n as usize);
    let msum: i64 = modes.iter().sum();
    let total = HalfInt::from_int(msum);
    let ratio = spec.prefactor_ratio(total)?;
    let mut c = &vandermonde(spec, modes) * &ratio;
    c = &c * &Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
    if rescaled {
        c = &c * &normalizer_q(spec, n);
    }
    let kind = if last_fermionic { WKind::F } else { WKind::B };
    w_sum(spec, &[(kind, msum, n as i64 + 1, c)])
}

/// The worked sub-4 / sub-6 example shapes: the same content as the
/// general family, but assembled from the printed product of pairwise
/// differences rather than through `vandermonde`.
pub fn ex_sub_rhs(
    spec: &DeformationSpec,
    n: u32,
    modes: &[i64],
    last_fermionic: bool,
) -> Result<GradedOperator, RhsError> {
    assert_eq!(modes.len(), 2 * n as usize);
    let msum: i64 = modes.iter().sum();
    let ratio = spec.prefactor_ratio(HalfInt::from_int(msum))?;
    let mut c = &ratio * &Scalar::from_rational(num_rational::BigRational::new(1.into(), 2.into()));
    for k in 1..modes.len() {
        for j in 0..k {
            c = &c
                * &(&spec.deformed_number(HalfInt::from_int(modes[k]))
                    - &spec.deformed_number(HalfInt::from_int(modes[j])));
        }
    }
    let kind = if last_fermionic { WKind::F } else { WKind::B };
    w_sum(spec, &[(kind, msum, n as i64 + 1, c)])
}

/// The Virasoro-Witt pair relations, variants 1-8.
pub fn vw_rhs(
    spec: &DeformationSpec,
    variant: u8,
    m1: i64,
    m2: i64,
) -> Result<GradedOperator, RhsError> {
    let num = |x: i64| spec.deformed_number(HalfInt::from_int(x));
    let mbar = m1 + m2;
    match variant {
        1 => w_sum(spec, &[(WKind::B, mbar, 2, &num(m2) - &num(m1))]),
        2 => w_sum(spec, &[(WKind::F, mbar, 2, &num(m2) - &num(m1))]),
        3 => w_sum(spec, &[(WKind::B, mbar, 1, num(m2))]),
        4 => w_sum(spec, &[(WKind::F, mbar, 1, num(m2))]),
        5 => w_sum(spec, &[(WKind::F, mbar, 1, num(-m1))]),
        6..=8 => Ok(GradedOperator::zero(SpaceSignature::landau())),
        _ => unreachable!("vw variant 1-8"),
    }
}

/// The Witt 3-algebra relations, variants 1-7.
pub fn witt3_rhs(
    spec: &DeformationSpec,
    variant: u8,
    m1: i64,
    m2: i64,
    m3: i64,
) -> Result<GradedOperator, RhsError> {
    let num = |x: i64| spec.deformed_number(HalfInt::from_int(x));
    let total = m1 + m2 + m3;
    match variant {
        1 | 2 => {
            let kind = if variant == 1 { WKind::B } else { WKind::F };
            let c = &num(m2) - &num(m1);
            w_sum(
                spec,
                &[
                    (kind, total, 2, c.clone()),
                    (kind, total, 1, &c * &num(m3)),
                ],
            )
        }
        3 | 4 => {
            let kind = if variant == 3 { WKind::B } else { WKind::F };
            w_sum(spec, &[(kind, total, 1, &num(m2) - &num(m3))])
        }
        5..=7 => Ok(GradedOperator::zero(SpaceSignature::landau())),
        _ => unreachable!("witt3 variant 1-7"),
    }
}

/// The sub-3-algebra relations (variants: 1 BBB -> B, 2 BBF -> F,
/// 3 BFF -> 0, 4 FFF -> 0), paper-literal index pattern.
#[allow(clippy::too_many_arguments)]
pub fn sub3_rhs(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    variant: u8,
    m1: i64,
    r1: u32,
    m2: i64,
    r2: u32,
    m3: i64,
    r3: u32,
) -> Result<GradedOperator, RhsError> {
    if variant >= 3 {
        return Ok(GradedOperator::zero(SpaceSignature::landau()));
    }
    let kind = if variant == 1 { WKind::B } else { WKind::F };
    let mt = m1 + m2 + m3;
    let rt = r1 as i64 + r2 as i64 + r3 as i64;
    let mut terms: Vec<(WKind, i64, i64, Scalar)> = Vec::new();
    // term sign, f-pair, alpha2-bound, A/exponent argument as printed.
    struct T {
        sign: i64,
        fpair: (i64, u32, i64, u32),
        bound: u32,
        arg: fn(i64, [i64; 3], [i64; 3]) -> i64,
    }
    let ts = [
        T {
            sign: 1,
            fpair: (m2, r2, m3, r3),
            bound: r1 - 1,
            arg: |a1, m, r| m[1] + m[2] + r[1] + r[2] - 2 - a1,
        },
        T {
            sign: -1,
            fpair: (m1, r1, m3, r3),
            bound: r2 - 1,
            arg: |a1, m, r| m[0] + m[2] + r[1] + r[2] - 2 - a1,
        },
        T {
            sign: 1,
            fpair: (m1, r1, m2, r2),
            bound: r3 - 1,
            arg: |a1, m, r| m[0] + m[2] + r[0] + r[1] - 2 - a1,
        },
    ];
    let ms = [m1, m2, m3];
    let rs = [r1 as i64, r2 as i64, r3 as i64];
    for t in &ts {
        let f = structure_f(spec, repairs, t.fpair.0, t.fpair.1, t.fpair.2, t.fpair.3);
        for (a1, fc) in &f {
            for a2 in 0..=t.bound {
                let x = (t.arg)(*a1 as i64, ms, rs);
                let mut c = fc.clone();
                c = &c * &Scalar::from_int(t.sign);
                c = &c * &p_power(spec, repairs, a2, t.bound);
                c = &c * &q_factor(spec, (t.bound - a2) as i64 * x);
                c = &c * &spec.deformed_binomial(t.bound, a2).expect("a2 <= bound");
                c = &c * &spec.falling_factorial(HalfInt::from_int(x), a2);
                if !c.is_zero() {
                    terms.push((kind, mt, rt - 2 - *a1 as i64 - a2 as i64, c));
                }
            }
        }
    }
    w_sum(spec, &terms)
}

/// Derived n-algebra right side: the Koszul-signed sum over orderings with
/// each ordered W-word expanded by iterating the normal-ordering rule.
/// Returns the operator together with the derivation trace.
pub fn nalg_rhs(
    spec: &DeformationSpec,
    repairs: &RepairFlags,
    modes: &[i64],
    depths: &[u32],
    last_fermionic: bool,
) -> Result<(GradedOperator, String), RhsError> {
    if !repairs.nalg_derived {
        return Err(RhsError::LiteralUndefined(
            "the printed n-algebra exponents are undefined symbols".into(),
        ));
    }
    let n = modes.len();
    assert_eq!(depths.len(), n);
    let mut rule_memo: HashMap<(u32, i64), Vec<Scalar>> = HashMap::new();
    let mut trace: Vec<String> = Vec::new();
    let mut rule = |c: u32, a: i64| -> Result<Vec<Scalar>, RhsError> {
        if let Some(hit) = rule_memo.get(&(c, a)) {
            return Ok(hit.clone());
        }
        let kappa = normal_order_rule(spec, c, a).map_err(|e| match e {
            ProjectionError::NotInSpan(rem) => RhsError::NoClosure(rem),
            ProjectionError::Backend(b) => RhsError::Backend(b),
        })?;
        let shown: Vec<String> = kappa
            .iter()
            .enumerate()
            .map(|(j, k)| format!("j={}: {}", j, k))
            .collect();
        trace.push(format!(
            "b^{} bdag^{} = sum_j kappa_j bdag^({}-j) b^({}-j) with {}",
            c,
            a,
            a,
            c,
            shown.join("; ")
        ));
        rule_memo.insert((c, a), kappa.clone());
        Ok(kappa)
    };
    // Parities: only the last operand may be fermionic.
    let parities: Vec<u8> = (0..n)
        .map(|i| if last_fermionic && i == n - 1 { 1 } else { 0 })
        .collect();
    let weights: Vec<HalfInt> = modes.iter().map(|&m| HalfInt::from_int(m)).collect();
    let total: HalfInt = weights.iter().copied().sum();
    let pref = crate::brackets::bracket_prefactor(spec, n, Some(total))
        .map_err(|e| match e {
            crate::brackets::BracketError::Backend(b) => RhsError::Backend(b),
            other => RhsError::UndefinedGenerator(other.to_string()),
        })?;
    // Accumulate signed word expansions: map (m, r) -> Scalar.
    let mut table: BTreeMap<(i64, i64), Scalar> = BTreeMap::new();
    for perm in crate::brackets::permutations(n) {
        let sign = crate::brackets::koszul_sign(&perm, &parities).combined();
        // Left-fold the word through the normal-ordering rule.
        let first = perm[0] as usize;
        let mut word: BTreeMap<(i64, i64), Scalar> = BTreeMap::new();
        word.insert((modes[first], depths[first] as i64), Scalar::one());
        for &kidx in &perm[1..] {
            let (m2, r2) = (modes[kidx as usize], depths[kidx as usize] as i64);
            let mut next: BTreeMap<(i64, i64), Scalar> = BTreeMap::new();
            for ((mu, rho), coeff) in &word {
                let c = (rho - 1) as u32;
                let a = m2 + r2 - 1;
                let kappa = rule(c, a)?;
                for (j, kj) in kappa.iter().enumerate() {
                    if kj.is_zero() {
                        continue;
                    }
                    let key = (mu + m2, rho + r2 - 1 - j as i64);
                    let e = next.entry(key).or_insert_with(Scalar::zero);
                    *e = &*e + &(coeff * kj);
                }
            }
            word = next;
        }
        for (key, c) in word {
            let signed = if sign < 0 { -c } else { c };
            let e = table.entry(key).or_insert_with(Scalar::zero);
            *e = &*e + &signed;
        }
    }
    let kind = if last_fermionic { WKind::F } else { WKind::B };
    let terms: Vec<(WKind, i64, i64, Scalar)> = table
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((m, r), c)| (kind, m, r, &c * &pref))
        .collect();
    let op = w_sum(spec, &terms)?;
    Ok((op, trace.join("\n")))
}

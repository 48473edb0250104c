//! Expansion of coefficient functions in the falling-factorial basis
//! A^k(nu) = [nu][nu-1]...[nu-k+1], and the normal-ordering rule derived
//! from it.
//!
//! The basis elements have strictly increasing leading monomials, so a
//! descending elimination either produces the exact expansion or leaves a
//! nonzero remainder, which is reported rather than forced. Backends whose
//! deformed numbers are polynomials in a single grading symbol (the q case,
//! the classical case, single-symbol series tables) always expand; the
//! two-symbol (p,q) case genuinely does not close, and the remainder is the
//! honest record of that.

use super::coeff::{CfMono, CoeffFn};
use crate::backend::{BackendError, DeformationSpec};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("coefficient function is not in the falling-factorial span; remainder {0}")]
    NotInSpan(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Expand `g` as sum_k coeffs[k] * A^k(nu_reg) for k = 0..=k_max.
/// Fails with the remainder if `g` is outside the span.
pub fn project_falling(
    g: &CoeffFn,
    spec: &DeformationSpec,
    reg: usize,
    k_max: u32,
) -> Result<Vec<Scalar>, ProjectionError> {
    let mut basis: Vec<CoeffFn> = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        basis.push(CoeffFn::falling_factorial_fn(spec, reg, k)?);
    }
    let leads: Vec<(CfMono, Scalar)> = basis
        .iter()
        .map(|b| {
            let (m, c) = b
                .iter_terms()
                .next_back()
                .expect("falling factorials are nonzero");
            (*m, c.clone())
        })
        .collect();
    let mut rem = g.clone();
    let mut coeffs = vec![Scalar::zero(); k_max as usize + 1];
    for k in (0..=k_max as usize).rev() {
        if rem.is_zero() {
            break;
        }
        let (lead_m, lead_c) = &leads[k];
        let c_here = rem
            .iter_terms()
            .find(|(m, _)| *m == lead_m)
            .map(|(_, c)| c.clone());
        if let Some(c) = c_here {
            let coeff = &c / lead_c;
            rem = rem.sub(&basis[k].scale(&coeff));
            coeffs[k] = coeff;
        }
    }
    if !rem.is_zero() {
        return Err(ProjectionError::NotInSpan(rem.to_string()));
    }
    Ok(coeffs)
}

/// The normal-ordering rule
///     b^c b-dagger^a = sum_j kappa_j b-dagger^(a-j) b^(c-j)
/// obtained by expanding A^c(nu + a) in the A^k(nu) basis: kappa_j is the
/// coefficient of A^(c-j). Where the expansion does not exist, the backend
/// has no scalar-coefficient closure of the W-operator products.
pub fn normal_order_rule(
    spec: &DeformationSpec,
    c: u32,
    a: i64,
) -> Result<Vec<Scalar>, ProjectionError> {
    let shifted = CoeffFn::falling_factorial_fn(spec, 0, c)?.shift(0, a as i32);
    let coeffs = project_falling(&shifted, spec, 0, c)?;
    // kappa_j corresponds to the A^(c-j) component.
    Ok((0..=c as usize).map(|j| coeffs[c as usize - j].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::DeformationSpec;
    use crate::halfint::HalfInt;

    #[test]
    fn classical_rule_is_binomial_vandermonde() {
        // A^c(nu+a) = sum_j C(c,j) A^j(a) A^(c-j)(nu) classically, so
        // kappa_j = C(c,j) * a(a-1)...(a-j+1).
        let cl = DeformationSpec::classical();
        let kap = normal_order_rule(&cl, 2, 3).unwrap();
        // j = 0: 1; j = 1: C(2,1)*3 = 6; j = 2: C(2,2)*3*2 = 6.
        assert_eq!(kap[0], Scalar::one());
        assert_eq!(kap[1], Scalar::from_int(6));
        assert_eq!(kap[2], Scalar::from_int(6));
    }

    #[test]
    fn q_rule_reproduces_the_shifted_product_pointwise() {
        let spec = DeformationSpec::q_case();
        let c = 3u32;
        let a = 4i64;
        let kap = normal_order_rule(&spec, c, a).unwrap();
        // Check the operator identity numerically on indices: A^c(nu+a)
        // must equal sum_j kappa_j A^(c-j)(nu).
        for nu in 0..6i64 {
            let lhs = spec.falling_factorial(HalfInt::from_int(nu + a), c);
            let mut rhs = Scalar::zero();
            for (j, k) in kap.iter().enumerate() {
                rhs = &rhs
                    + &(k * &spec.falling_factorial(HalfInt::from_int(nu), c - j as u32));
            }
            assert_eq!(lhs, rhs, "nu = {}", nu);
        }
    }

    #[test]
    fn pq_case_reports_no_closure() {
        let spec = DeformationSpec::pq_case();
        assert!(matches!(
            normal_order_rule(&spec, 1, 1),
            Err(ProjectionError::NotInSpan(_))
        ));
    }
}

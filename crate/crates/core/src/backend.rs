//! Deformation backends: the choice of the meromorphic R fixing the
//! deformed numbers [n] = R(p^n, q^n), together with the rational sample
//! point used by the truncated-matrix oracle.

use crate::halfint::HalfInt;
use crate::laurent::{Gen, LaurentPoly, NVARS};
use crate::scalar::{Scalar, ScalarError};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("factorial/binomial argument out of range: {0}")]
    OutOfRange(String),
    #[error("series table is invalid: {0}")]
    BadSeriesTable(String),
    #[error("prefactor [-2M]/[-M] is 0/0 at M=0 in this backend")]
    PrefactorUndefined,
    #[error("the {0} backend has no polynomial coefficient-function realization")]
    OperatorUnsupported(&'static str),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Serialize rationals as "n/d" strings so config echoes stay exact.
pub mod rat_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        BigRational::from_str(&s).map_err(serde::de::Error::custom)
    }
}

/// A finite coefficient table for a general meromorphic R: the deformed
/// number is the finite series sum r_uv p^(u*n) q^(v*n).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesTable {
    pub terms: Vec<SeriesTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub u: i32,
    pub v: i32,
    #[serde(with = "rat_str")]
    pub coeff: BigRational,
}

impl SeriesTable {
    /// Validates the defining constraint R(1,1) = 0: the coefficients sum
    /// to zero.
    pub fn new(mut terms: Vec<SeriesTerm>) -> Result<Self, BackendError> {
        terms.retain(|t| !t.coeff.is_zero());
        terms.sort_by_key(|t| (t.u, t.v));
        for w in terms.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(BackendError::BadSeriesTable(format!(
                    "duplicate exponent pair ({}, {})",
                    w[0].u, w[0].v
                )));
            }
        }
        let total: BigRational = terms.iter().map(|t| t.coeff.clone()).sum();
        if !total.is_zero() {
            return Err(BackendError::BadSeriesTable(
                "coefficients must sum to zero (R(1,1) = 0)".into(),
            ));
        }
        Ok(SeriesTable { terms })
    }

    /// Parse a plain text table: one "u v coeff" triple per line, with `#`
    /// comments.
    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let bad = || BackendError::BadSeriesTable(format!("line {}: expected 'u v coeff'", lineno + 1));
            let u: i32 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let v: i32 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let c = it.next().ok_or_else(bad)?;
            let coeff = BigRational::from_str(c).map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            terms.push(SeriesTerm { u, v, coeff });
        }
        SeriesTable::new(terms)
    }
}

/// The tagged choice of R.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RForm {
    /// R(x,y) = (y-1)/(q-1): [n] = (1-q^n)/(1-q).
    Q,
    /// R(x,y) = (x-y)/(p-q): [n] = (p^n-q^n)/(p-q).
    Pq,
    /// R(x,y) = (x-y)/(a x/p - b y/q).
    Abpq,
    /// [n] = n.
    Classical,
    /// Finite series table.
    Series { table: SeriesTable },
}

impl RForm {
    pub fn name(&self) -> &'static str {
        match self {
            RForm::Q => "q",
            RForm::Pq => "pq",
            RForm::Abpq => "abpq",
            RForm::Classical => "classical",
            RForm::Series { .. } => "series",
        }
    }
}

/// Rational values assigned to the square-root generators and to a, b for
/// the numeric oracle. We sample the roots directly (p is the square of the
/// `sqrt_p` value) so half-integer powers evaluate to exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplePoint {
    #[serde(with = "rat_str")]
    pub sqrt_p: BigRational,
    #[serde(with = "rat_str")]
    pub sqrt_q: BigRational,
    #[serde(with = "rat_str")]
    pub sqrt_lambda: BigRational,
    #[serde(with = "rat_str")]
    pub a: BigRational,
    #[serde(with = "rat_str")]
    pub b: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Default for SamplePoint {
    /// Generic point avoiding p = q, pq = 1, p = 1, q = 1 and the analogous
    /// coincidences for the roots.
    fn default() -> Self {
        SamplePoint {
            sqrt_p: rat(7, 5),
            sqrt_q: rat(3, 5),
            sqrt_lambda: rat(2, 3),
            a: rat(5, 4),
            b: rat(4, 3),
        }
    }
}

impl SamplePoint {
    pub fn values(&self) -> [BigRational; NVARS] {
        [
            self.sqrt_p.clone(),
            self.sqrt_q.clone(),
            self.sqrt_lambda.clone(),
            self.a.clone(),
            self.b.clone(),
        ]
    }
}

/// The full backend choice: which R, plus the oracle sample point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeformationSpec {
    pub form: RForm,
    #[serde(default)]
    pub sample: SamplePoint,
}

impl DeformationSpec {
    pub fn new(form: RForm) -> Self {
        DeformationSpec {
            form,
            sample: SamplePoint::default(),
        }
    }

    pub fn classical() -> Self {
        Self::new(RForm::Classical)
    }

    pub fn q_case() -> Self {
        Self::new(RForm::Q)
    }

    pub fn pq_case() -> Self {
        Self::new(RForm::Pq)
    }

    /// Checks that the sample point does not annihilate a backend
    /// denominator (p != q for the (p,q) case, q != 1 for the q case, ...).
    pub fn validate_sample(&self) -> Result<(), BackendError> {
        let v = self.sample.values();
        let bad = |what: &str| BackendError::BadSeriesTable(format!("sample point: {}", what));
        match &self.form {
            RForm::Q => {
                if v[Gen::SqrtQ as usize] == BigRational::one() {
                    return Err(bad("q = 1 annihilates 1 - q"));
                }
            }
            RForm::Pq => {
                if v[Gen::SqrtP as usize] == v[Gen::SqrtQ as usize] {
                    return Err(bad("p = q annihilates p - q"));
                }
            }
            RForm::Abpq => {
                if v[Gen::A as usize].is_zero() && v[Gen::B as usize].is_zero() {
                    return Err(bad("a = b = 0 annihilates the denominator"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The deformed number [nu] = R(p^nu, q^nu), for integer or half-integer
    /// nu.
    pub fn deformed_number(&self, nu: HalfInt) -> Scalar {
        let h = nu.halves() as i32;
        match &self.form {
            RForm::Classical => Scalar::from_rational(nu.as_rational()),
            RForm::Q => {
                // (1 - q^nu)/(1 - q)
                let num = LaurentPoly::one().sub(&LaurentPoly::gen_pow(Gen::SqrtQ, h));
                let den = LaurentPoly::one().sub(&LaurentPoly::gen_pow(Gen::SqrtQ, 2));
                Scalar::from_ratio(num, den).expect("1 - q != 0")
            }
            RForm::Pq => {
                let num =
                    LaurentPoly::gen_pow(Gen::SqrtP, h).sub(&LaurentPoly::gen_pow(Gen::SqrtQ, h));
                let den =
                    LaurentPoly::gen_pow(Gen::SqrtP, 2).sub(&LaurentPoly::gen_pow(Gen::SqrtQ, 2));
                Scalar::from_ratio(num, den).expect("p - q != 0")
            }
            RForm::Abpq => {
                // (p^nu - q^nu)/(a p^(nu-1) - b q^(nu-1))
                let num =
                    LaurentPoly::gen_pow(Gen::SqrtP, h).sub(&LaurentPoly::gen_pow(Gen::SqrtQ, h));
                let ta = LaurentPoly::gen_pow(Gen::A, 1).mul(&LaurentPoly::gen_pow(Gen::SqrtP, h - 2));
                let tb = LaurentPoly::gen_pow(Gen::B, 1).mul(&LaurentPoly::gen_pow(Gen::SqrtQ, h - 2));
                Scalar::from_ratio(num, ta.sub(&tb)).expect("generic a, b denominator")
            }
            RForm::Series { table } => {
                let mut acc = LaurentPoly::zero();
                for t in &table.terms {
                    let m = LaurentPoly::gen_pow(Gen::SqrtP, t.u * h)
                        .mul(&LaurentPoly::gen_pow(Gen::SqrtQ, t.v * h))
                        .scale(&t.coeff);
                    acc = acc.add(&m);
                }
                Scalar::from_poly(acc)
            }
        }
    }

    /// [n]! = [1][2]...[n]; empty product for n = 0.
    pub fn deformed_factorial(&self, n: u32) -> Scalar {
        let mut acc = Scalar::one();
        for j in 1..=n {
            acc = &acc * &self.deformed_number(HalfInt::from_int(j as i64));
        }
        acc
    }

    /// [n]! / ([k]! [n-k]!), exactly reduced. Requires n >= k >= 0.
    pub fn deformed_binomial(&self, n: u32, k: u32) -> Result<Scalar, BackendError> {
        if k > n {
            return Err(BackendError::OutOfRange(format!(
                "binomial requires n >= k, got n={} k={}",
                n, k
            )));
        }
        let num = self.deformed_factorial(n);
        let den = &self.deformed_factorial(k) * &self.deformed_factorial(n - k);
        Ok(num.checked_div(&den)?)
    }

    /// Binomial extended by zero outside the valid domain; used by the
    /// alternating sums over permutation groups where out-of-range entries
    /// simply drop out.
    pub fn binomial_or_zero(&self, n: i64, k: i64) -> Scalar {
        if k < 0 || n < 0 || k > n {
            return Scalar::zero();
        }
        self.deformed_binomial(n as u32, k as u32)
            .expect("checked domain")
    }

    /// Falling factorial A^k_x = [x][x-1]...[x-k+1] at a concrete index x
    /// (for the coefficient-function version see the shift-operator module).
    pub fn falling_factorial(&self, x: HalfInt, k: u32) -> Scalar {
        let mut acc = Scalar::one();
        for j in 0..k {
            acc = &acc * &self.deformed_number(x - HalfInt::from_int(j as i64));
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    /// The bracket prefactor ratio [-2M]/[-M], via the closed form that has
    /// no removable singularity where one exists.
    pub fn prefactor_ratio(&self, m: HalfInt) -> Result<Scalar, BackendError> {
        let neg = -m;
        match &self.form {
            RForm::Classical => Ok(Scalar::from_int(2)),
            RForm::Pq => {
                // p^-M + q^-M
                Ok(&Scalar::p_pow(neg) + &Scalar::q_pow(neg))
            }
            RForm::Q => Ok(&Scalar::one() + &Scalar::q_pow(neg)),
            RForm::Abpq | RForm::Series { .. } => {
                let den = self.deformed_number(neg);
                if den.is_zero() {
                    return Err(BackendError::PrefactorUndefined);
                }
                Ok(self.deformed_number(neg * 2).checked_div(&den)?)
            }
        }
    }
}

impl fmt::Display for DeformationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.form.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_number_three_expands() {
        // [3]_q = (1-q^3)/(1-q) = 1 + q + q^2 by polynomial division.
        let spec = DeformationSpec::q_case();
        let q = Scalar::gen_pow(Gen::SqrtQ, 2);
        let expect = &(&Scalar::one() + &q) + &q.pow(2).unwrap();
        assert_eq!(spec.deformed_number(HalfInt::from_int(3)), expect);
    }

    #[test]
    fn zero_mode_vanishes_in_every_backend() {
        let specs = [
            DeformationSpec::q_case(),
            DeformationSpec::pq_case(),
            DeformationSpec::classical(),
            DeformationSpec::new(RForm::Abpq),
        ];
        for s in specs {
            assert!(s.deformed_number(HalfInt::ZERO).is_zero());
        }
        // Series tables satisfy R(1,1) = 0 by construction.
        let t = SeriesTable::new(vec![
            SeriesTerm { u: 1, v: 0, coeff: rat(1, 1) },
            SeriesTerm { u: 0, v: 1, coeff: rat(-1, 1) },
        ])
        .unwrap();
        let s = DeformationSpec::new(RForm::Series { table: t });
        assert!(s.deformed_number(HalfInt::ZERO).is_zero());
    }

    #[test]
    fn pq_number_negative_one() {
        // [-1]_(p,q) = (p^-1 - q^-1)/(p - q) = -(pq)^-1 by direct expansion.
        let spec = DeformationSpec::pq_case();
        let expect = -&(&Scalar::p_pow(HalfInt::from_int(-1)) * &Scalar::q_pow(HalfInt::from_int(-1)));
        assert_eq!(spec.deformed_number(HalfInt::from_int(-1)), expect);
    }

    #[test]
    fn factorials_and_binomials() {
        let pq = DeformationSpec::pq_case();
        let cl = DeformationSpec::classical();
        // [2]!_(p,q) = [1][2] = p + q.
        let ppq = &Scalar::p_pow(HalfInt::from_int(1)) + &Scalar::q_pow(HalfInt::from_int(1));
        assert_eq!(pq.deformed_factorial(2), ppq);
        assert_eq!(cl.deformed_factorial(4), Scalar::from_int(24));
        assert!(pq.deformed_binomial(5, 0).unwrap().is_one());
        assert_eq!(pq.deformed_binomial(2, 1).unwrap(), ppq);
        // C^2_4 in the q backend: [4][3]/[2] = (1+q^2)(1+q+q^2) by the
        // factorial formula.
        let q = Scalar::gen_pow(Gen::SqrtQ, 2);
        let f1 = &Scalar::one() + &q.pow(2).unwrap();
        let f2 = &(&Scalar::one() + &q) + &q.pow(2).unwrap();
        assert_eq!(
            DeformationSpec::q_case().deformed_binomial(4, 2).unwrap(),
            &f1 * &f2
        );
        assert!(pq.deformed_binomial(1, 2).is_err());
    }

    #[test]
    fn prefactor_ratio_closed_forms() {
        let pq = DeformationSpec::pq_case();
        let m1 = HalfInt::from_int(1);
        let expect = &Scalar::p_pow(-m1) + &Scalar::q_pow(-m1);
        assert_eq!(pq.prefactor_ratio(m1).unwrap(), expect);
        // The simplified form has no singularity at M = 0.
        assert_eq!(pq.prefactor_ratio(HalfInt::ZERO).unwrap(), Scalar::from_int(2));
        assert_eq!(
            DeformationSpec::classical().prefactor_ratio(m1).unwrap(),
            Scalar::from_int(2)
        );
        // Literal-quotient backends report the 0/0.
        assert_eq!(
            DeformationSpec::new(RForm::Abpq).prefactor_ratio(HalfInt::ZERO),
            Err(BackendError::PrefactorUndefined)
        );
        // Cross-check: ratio(M) * [-M] = [-2M] exactly on a small grid.
        for m in -3..=3 {
            let m = HalfInt::from_int(m);
            let lhs = &pq.prefactor_ratio(m).unwrap() * &pq.deformed_number(-m);
            assert_eq!(lhs, pq.deformed_number(-m * 2));
        }
    }

    #[test]
    fn q_is_pq_at_p_equal_one() {
        // Substitution oracle: evaluating the (p,q) forms at sqrt_p = 1
        // must reproduce the q forms, for all five scalar operations.
        let q = DeformationSpec::q_case();
        let pq = DeformationSpec::pq_case();
        let at_p1 = |s: &Scalar| {
            let mut v = SamplePoint::default().values();
            v[Gen::SqrtP as usize] = BigRational::one();
            s.eval(&v).unwrap()
        };
        let vals = SamplePoint::default().values();
        for n in -4..=4i64 {
            let n = HalfInt::from_int(n);
            assert_eq!(at_p1(&pq.deformed_number(n)), q.deformed_number(n).eval(&vals).unwrap());
        }
        for n in 0..=5 {
            assert_eq!(
                at_p1(&pq.deformed_factorial(n)),
                q.deformed_factorial(n).eval(&vals).unwrap()
            );
            for k in 0..=n {
                assert_eq!(
                    at_p1(&pq.deformed_binomial(n, k).unwrap()),
                    q.deformed_binomial(n, k).unwrap().eval(&vals).unwrap()
                );
            }
        }
        for m in [-2i64, -1, 0, 1, 2] {
            let m = HalfInt::from_int(m);
            assert_eq!(
                at_p1(&pq.prefactor_ratio(m).unwrap()),
                q.prefactor_ratio(m).unwrap().eval(&vals).unwrap()
            );
        }
    }

    #[test]
    fn numeric_agreement_with_direct_evaluation() {
        // [n] evaluated at the sample point agrees with direct rational
        // evaluation of R(p^n, q^n) for n in [-6, 6], all backends.
        let sample = SamplePoint::default();
        let v = sample.values();
        let p = &v[0] * &v[0];
        let q = &v[1] * &v[1];
        for n in -6..=6i64 {
            let pn = p.pow(n as i32);
            let qn = q.pow(n as i32);
            let direct_q = (BigRational::one() - &qn) / (BigRational::one() - &q);
            let direct_pq = (&pn - &qn) / (&p - &q);
            let direct_ab = (&pn - &qn)
                / (&v[3] * &pn / &p - &v[4] * &qn / &q);
            let n = HalfInt::from_int(n);
            assert_eq!(
                DeformationSpec::q_case().deformed_number(n).eval(&v).unwrap(),
                direct_q
            );
            assert_eq!(
                DeformationSpec::pq_case().deformed_number(n).eval(&v).unwrap(),
                direct_pq
            );
            assert_eq!(
                DeformationSpec::new(RForm::Abpq).deformed_number(n).eval(&v).unwrap(),
                direct_ab
            );
            assert_eq!(
                DeformationSpec::classical().deformed_number(n).eval(&v).unwrap(),
                n.as_rational()
            );
        }
    }

    #[test]
    fn pascal_type_polynomiality() {
        // Binomials are denominator-free after reduction for the q and
        // (p,q) backends, 0 <= k <= n <= 8.
        for spec in [DeformationSpec::q_case(), DeformationSpec::pq_case()] {
            for n in 0..=8 {
                for k in 0..=n {
                    let c = spec.deformed_binomial(n, k).unwrap();
                    assert!(c.denominator().is_one(), "C({},{}) not polynomial: {}", n, k, c);
                }
            }
        }
    }

    #[test]
    fn series_table_requires_zero_sum() {
        let bad = SeriesTable::new(vec![SeriesTerm { u: 1, v: 0, coeff: rat(1, 1) }]);
        assert!(bad.is_err());
        let parsed = SeriesTable::parse("# (p,q) as a table\n1 0 1\n0 1 -1\n").unwrap();
        assert_eq!(parsed.terms.len(), 2);
    }
}

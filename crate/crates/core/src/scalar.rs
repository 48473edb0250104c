//! The exact coefficient field: quotients of Laurent polynomials in
//! sqrt(p), sqrt(q), sqrt(lambda), a, b over the rationals, kept in a
//! canonical reduced form so structural equality is field equality.
//!
//! Canonical form: the denominator is an ordinary polynomial (minimum
//! exponent zero in every variable) with lex-leading coefficient 1, coprime
//! to the shifted numerator; Laurent monomial units live in the numerator.

use crate::halfint::HalfInt;
use crate::laurent::{gcd_poly, Gen, LaurentPoly, NVARS};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("denominator vanishes at the sample point")]
    SampleHitsPole,
}

/// An element of the coefficient field, always in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl Scalar {
    fn make(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Scalar {
                num: LaurentPoly::zero(),
                den: LaurentPoly::one(),
            };
        }
        if den.is_one() {
            return Scalar {
                num,
                den,
            };
        }
        if let Some(c) = den.as_constant() {
            return Scalar {
                num: num.scale(&(BigRational::one() / c)),
                den: LaurentPoly::one(),
            };
        }
        // Move the denominator's monomial content into the numerator.
        let dmin = den.min_exps();
        let neg_dmin = neg_exps(&dmin);
        let den = den.mul_monomial(&neg_dmin, &BigRational::one());
        let num = num.mul_monomial(&neg_dmin, &BigRational::one());
        // Strip the numerator's monomial content before the gcd.
        let nmin = num.min_exps();
        let nhat = num.mul_monomial(&neg_exps(&nmin), &BigRational::one());
        let (mut nred, mut dred) = match known_factor_reduce(&nhat, &den) {
            Some(pair) => pair,
            None => {
                let g = gcd_poly(&nhat, &den);
                (
                    nhat.div_exact(&g).expect("gcd divides"),
                    den.div_exact(&g).expect("gcd divides"),
                )
            }
        };
        // Division can leave a monomial unit in the denominator; strip it.
        let dmin2 = dred.min_exps();
        if dmin2.iter().any(|&k| k != 0) {
            let neg = neg_exps(&dmin2);
            dred = dred.mul_monomial(&neg, &BigRational::one());
            nred = nred.mul_monomial(&neg, &BigRational::one());
        }
        // Monic denominator.
        let lc = dred.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            dred = dred.scale(&inv);
            nred = nred.scale(&inv);
        }
        let num = nred.mul_monomial(&nmin, &BigRational::one());
        Scalar { num, den: dred }
    }

    pub fn zero() -> Self {
        Scalar {
            num: LaurentPoly::zero(),
            den: LaurentPoly::one(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            num: LaurentPoly::one(),
            den: LaurentPoly::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar {
            num: LaurentPoly::from_int(n),
            den: LaurentPoly::one(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar {
            num: LaurentPoly::constant(r),
            den: LaurentPoly::one(),
        }
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        Scalar {
            num: p,
            den: LaurentPoly::one(),
        }
    }

    pub fn from_ratio(num: LaurentPoly, den: LaurentPoly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::make(num, den))
    }

    /// Generator to an integer power of the stored exponent (sqrt-halves).
    pub fn gen_pow(g: Gen, e: i32) -> Self {
        Scalar {
            num: LaurentPoly::gen_pow(g, e),
            den: LaurentPoly::one(),
        }
    }

    /// p^e for half-integer e (exactly, as a monomial in sqrt(p)).
    pub fn p_pow(e: HalfInt) -> Self {
        Self::gen_pow(Gen::SqrtP, e.halves() as i32)
    }

    /// q^e for half-integer e.
    pub fn q_pow(e: HalfInt) -> Self {
        Self::gen_pow(Gen::SqrtQ, e.halves() as i32)
    }

    /// lambda^e for half-integer e.
    pub fn lambda_pow(e: HalfInt) -> Self {
        Self::gen_pow(Gen::SqrtLambda, e.halves() as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn numerator(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn denominator(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::make(
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn inverse(&self) -> Result<Self, ScalarError> {
        Scalar::one().checked_div(self)
    }

    pub fn pow(&self, n: i64) -> Result<Self, ScalarError> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut r = Scalar::one();
        for _ in 0..n.unsigned_abs() {
            r = &r * &base;
        }
        Ok(r)
    }

    /// Evaluate at rational values for the square-root generators and a, b.
    pub fn eval(&self, vals: &[BigRational; NVARS]) -> Result<BigRational, ScalarError> {
        let d = self
            .den
            .eval(vals)
            .ok_or(ScalarError::SampleHitsPole)?;
        if d.is_zero() {
            return Err(ScalarError::SampleHitsPole);
        }
        let n = self.num.eval(vals).ok_or(ScalarError::SampleHitsPole)?;
        Ok(n / d)
    }

    /// Minimal sqrt(lambda) exponent of the numerator, or None for zero.
    /// Requires a lambda-free denominator (all denominators arising in the
    /// operator algebra are lambda-free).
    pub fn lambda_min_halves(&self) -> Option<i32> {
        assert!(
            self.den.max_exp(Gen::SqrtLambda).unwrap_or(0) == 0
                && self.den.min_exp(Gen::SqrtLambda).unwrap_or(0) == 0,
            "lambda-dependent denominator"
        );
        self.num.min_exp(Gen::SqrtLambda)
    }

    /// The part of this scalar with sqrt(lambda) exponent exactly `k`, with
    /// the lambda power stripped.
    pub fn lambda_slice(&self, k: i32) -> Scalar {
        Scalar::make(self.num.slice_exp(Gen::SqrtLambda, k, true), self.den.clone())
    }
}

fn neg_exps(e: &[i32; NVARS]) -> [i32; NVARS] {
    let mut r = *e;
    for k in r.iter_mut() {
        *k = -*k;
    }
    r
}

// ---------------------------------------------------------------------
// Fast reduction against the denominators the backends actually produce.
//
// Every denominator arising from the deformed-number constructors is a
// product of the linear irreducibles below (p - q = (sp-sq)(sp+sq),
// 1 - q = -(sq-1)(sq+1), ...). Divisibility by each is an exact
// substitution test (factor theorem), so the common case of a
// fully-reduced fraction is decided without any gcd chain. Exotic
// denominators fall back to the generic gcd.
// ---------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum KnownFactor {
    SpMinusSq,
    SpPlusSq,
    SqMinus1,
    SqPlus1,
    SpMinus1,
    SpPlus1,
}

const KNOWN_FACTORS: [KnownFactor; 6] = [
    KnownFactor::SpMinusSq,
    KnownFactor::SpPlusSq,
    KnownFactor::SqMinus1,
    KnownFactor::SqPlus1,
    KnownFactor::SpMinus1,
    KnownFactor::SpPlus1,
];

impl KnownFactor {
    fn poly(self) -> LaurentPoly {
        let sp = LaurentPoly::gen_pow(Gen::SqrtP, 1);
        let sq = LaurentPoly::gen_pow(Gen::SqrtQ, 1);
        let one = LaurentPoly::one();
        match self {
            KnownFactor::SpMinusSq => sp.sub(&sq),
            KnownFactor::SpPlusSq => sp.add(&sq),
            KnownFactor::SqMinus1 => sq.sub(&one),
            KnownFactor::SqPlus1 => sq.add(&one),
            KnownFactor::SpMinus1 => sp.sub(&one),
            KnownFactor::SpPlus1 => sp.add(&one),
        }
    }

    /// Exact divisibility test by substituting the factor's root.
    fn divides(self, p: &LaurentPoly) -> bool {
        use std::collections::BTreeMap;
        let mut acc: BTreeMap<[i32; NVARS], BigRational> = BTreeMap::new();
        for (e, c) in p.iter_terms() {
            let (e2, sign) = match self {
                KnownFactor::SpMinusSq => {
                    let mut x = *e;
                    x[Gen::SqrtQ as usize] += x[Gen::SqrtP as usize];
                    x[Gen::SqrtP as usize] = 0;
                    (x, false)
                }
                KnownFactor::SpPlusSq => {
                    let mut x = *e;
                    let sp = x[Gen::SqrtP as usize];
                    x[Gen::SqrtQ as usize] += sp;
                    x[Gen::SqrtP as usize] = 0;
                    (x, sp % 2 != 0)
                }
                KnownFactor::SqMinus1 => {
                    let mut x = *e;
                    x[Gen::SqrtQ as usize] = 0;
                    (x, false)
                }
                KnownFactor::SqPlus1 => {
                    let mut x = *e;
                    let sq = x[Gen::SqrtQ as usize];
                    x[Gen::SqrtQ as usize] = 0;
                    (x, sq % 2 != 0)
                }
                KnownFactor::SpMinus1 => {
                    let mut x = *e;
                    x[Gen::SqrtP as usize] = 0;
                    (x, false)
                }
                KnownFactor::SpPlus1 => {
                    let mut x = *e;
                    let sp = x[Gen::SqrtP as usize];
                    x[Gen::SqrtP as usize] = 0;
                    (x, sp % 2 != 0)
                }
            };
            let v = if sign { -c.clone() } else { c.clone() };
            let entry = acc.entry(e2).or_insert_with(BigRational::zero);
            *entry += v;
        }
        acc.values().all(|v| v.is_zero())
    }
}

thread_local! {
    static DEN_FACTOR_MEMO: std::cell::RefCell<
        std::collections::HashMap<LaurentPoly, Option<([u32; 6], BigRational)>>,
    > = std::cell::RefCell::new(std::collections::HashMap::new());
}

fn factor_known(den: &LaurentPoly) -> Option<([u32; 6], BigRational)> {
    if let Some(hit) = DEN_FACTOR_MEMO.with(|m| m.borrow().get(den).cloned()) {
        return hit;
    }
    let mut rest = den.clone();
    let mut mult = [0u32; KNOWN_FACTORS.len()];
    let out = 'outer: loop {
        if rest.is_constant() {
            break Some((mult, rest.as_constant().expect("constant remainder")));
        }
        for (i, f) in KNOWN_FACTORS.iter().enumerate() {
            if f.divides(&rest) {
                rest = rest.div_exact(&f.poly()).expect("substitution test");
                mult[i] += 1;
                continue 'outer;
            }
        }
        break None;
    };
    DEN_FACTOR_MEMO.with(|m| {
        let mut m = m.borrow_mut();
        if m.len() > 50_000 {
            m.clear();
        }
        m.insert(den.clone(), out.clone());
    });
    out
}

/// Try to reduce num/den assuming den is (a constant times) a product of
/// the known linear factors; None when den has any other factor.
fn known_factor_reduce(num: &LaurentPoly, den: &LaurentPoly) -> Option<(LaurentPoly, LaurentPoly)> {
    let (mult, c) = factor_known(den)?;
    let mut n = num.clone();
    let mut d = LaurentPoly::constant(c);
    for (i, f) in KNOWN_FACTORS.iter().enumerate() {
        let mut k = mult[i];
        let fp = f.poly();
        while k > 0 && f.divides(&n) {
            n = n.div_exact(&fp).expect("substitution test");
            k -= 1;
        }
        for _ in 0..k {
            d = d.mul(&fp);
        }
    }
    Some((n, d))
}

impl Scalar {
    /// Addition through the least common denominator: with d1 = g u1 and
    /// d2 = g u2, any common factor of the combined numerator and the
    /// denominator divides g, so only the small gcd needs reducing.
    fn add_impl(&self, other: &Scalar, negate: bool) -> Scalar {
        let flip = |s: &Scalar| if negate { -s } else { s.clone() };
        if self.is_zero() {
            return flip(other);
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = if negate {
                self.num.sub(&other.num)
            } else {
                self.num.add(&other.num)
            };
            return Scalar::make(num, self.den.clone());
        }
        let g = if self.den.is_one() || other.den.is_one() {
            LaurentPoly::one()
        } else {
            gcd_poly(&self.den, &other.den)
        };
        if g.is_one() {
            // Coprime denominators: the sum is already reduced.
            let num = if negate {
                self.num.mul(&other.den).sub(&other.num.mul(&self.den))
            } else {
                self.num.mul(&other.den).add(&other.num.mul(&self.den))
            };
            return Scalar::normalized_units_only(num, self.den.mul(&other.den));
        }
        let u1 = self.den.div_exact(&g).expect("gcd divides");
        let u2 = other.den.div_exact(&g).expect("gcd divides");
        let num = if negate {
            self.num.mul(&u2).sub(&other.num.mul(&u1))
        } else {
            self.num.mul(&u2).add(&other.num.mul(&u1))
        };
        if num.is_zero() {
            return Scalar::zero();
        }
        // Reduce only against the shared part g.
        let nmin = num.min_exps();
        let nhat = num.mul_monomial(&neg_exps(&nmin), &BigRational::one());
        let h = match known_factor_reduce(&nhat, &g) {
            Some((n2, g2)) => {
                return Scalar::normalized_units_only(
                    n2.mul_monomial(&nmin, &BigRational::one()),
                    g2.mul(&u1).mul(&u2),
                );
            }
            None => gcd_poly(&nhat, &g),
        };
        let nred = nhat.div_exact(&h).expect("gcd divides");
        let gred = g.div_exact(&h).expect("gcd divides");
        Scalar::normalized_units_only(
            nred.mul_monomial(&nmin, &BigRational::one()),
            gred.mul(&u1).mul(&u2),
        )
    }

    /// Final normalization when numerator and denominator are already
    /// coprime: strip denominator units and make it monic.
    fn normalized_units_only(num: LaurentPoly, den: LaurentPoly) -> Scalar {
        if num.is_zero() {
            return Scalar::zero();
        }
        let dmin = den.min_exps();
        let (mut num, mut den) = if dmin.iter().any(|&k| k != 0) {
            let neg = neg_exps(&dmin);
            (
                num.mul_monomial(&neg, &BigRational::one()),
                den.mul_monomial(&neg, &BigRational::one()),
            )
        } else {
            (num, den)
        };
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            den = den.scale(&inv);
            num = num.scale(&inv);
        }
        Scalar { num, den }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, other: &Scalar) -> Scalar {
        self.add_impl(other, false)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, other: &Scalar) -> Scalar {
        self.add_impl(other, true)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, other: &Scalar) -> Scalar {
        if self.is_zero() || other.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Scalar {
                num: self.num.mul(&other.num),
                den: LaurentPoly::one(),
            };
        }
        // Cross-reduce: gcd(n1, d2) and gcd(n2, d1); the factors that remain
        // are pairwise coprime, so no final gcd is needed.
        let n1min = self.num.min_exps();
        let n1hat = self.num.mul_monomial(&neg_exps(&n1min), &BigRational::one());
        let n2min = other.num.min_exps();
        let n2hat = other
            .num
            .mul_monomial(&neg_exps(&n2min), &BigRational::one());
        let cross = |n: &LaurentPoly, d: &LaurentPoly| -> (LaurentPoly, LaurentPoly) {
            if d.is_one() {
                return (n.clone(), d.clone());
            }
            match known_factor_reduce(n, d) {
                Some(pair) => pair,
                None => {
                    let g = gcd_poly(n, d);
                    (
                        n.div_exact(&g).expect("gcd divides"),
                        d.div_exact(&g).expect("gcd divides"),
                    )
                }
            }
        };
        let (n1, d2) = cross(&n1hat, &other.den);
        let (n2, d1) = cross(&n2hat, &self.den);
        let mut num = n1.mul(&n2);
        let mut shift = n1min;
        for i in 0..NVARS {
            shift[i] += n2min[i];
        }
        num = num.mul_monomial(&shift, &BigRational::one());
        let mut den = d1.mul(&d2);
        // Unit/monic normalization only; coprimality already holds.
        let dmin = den.min_exps();
        if dmin.iter().any(|&k| k != 0) {
            let neg = neg_exps(&dmin);
            den = den.mul_monomial(&neg, &BigRational::one());
            num = num.mul_monomial(&neg, &BigRational::one());
        }
        let lc = den.leading().expect("nonzero").1.clone();
        if !lc.is_one() {
            let inv = BigRational::one() / lc;
            den = den.scale(&inv);
            num = num.scale(&inv);
        }
        Scalar { num, den }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, other: &Scalar) -> Scalar {
        self.checked_div(other).expect("scalar division by zero")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            num: self.num.neg(),
            den: self.den,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.num_terms() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<BigInt> for Scalar {
    fn from(n: BigInt) -> Self {
        Scalar::from_rational(BigRational::from_integer(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Scalar {
        Scalar::gen_pow(Gen::SqrtP, 2)
    }
    fn q() -> Scalar {
        Scalar::gen_pow(Gen::SqrtQ, 2)
    }

    #[test]
    fn self_quotient_is_one() {
        let pq = &p() - &q();
        assert!(pq.checked_div(&pq).unwrap().is_one());
    }

    #[test]
    fn difference_of_squares_reduces() {
        // (p^2 - q^2)/(p - q) = p + q, by the polynomial division oracle:
        // (p + q)(p - q) expands back to p^2 - q^2.
        let p2 = p().pow(2).unwrap();
        let q2 = q().pow(2).unwrap();
        let lhs = (&p2 - &q2).checked_div(&(&p() - &q())).unwrap();
        let expect = &p() + &q();
        assert_eq!(lhs, expect);
        assert_eq!(&expect * &(&p() - &q()), &p2 - &q2);
    }

    #[test]
    fn sqrt_generator_squares() {
        let sp = Scalar::gen_pow(Gen::SqrtP, 1);
        assert_eq!(&sp * &sp, p());
    }

    #[test]
    fn division_by_zero_is_error() {
        assert_eq!(
            p().checked_div(&Scalar::zero()),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn cross_multiplied_equality_matches_canonical() {
        // x = p/(p-q), y = p(p+q) / ((p-q)(p+q)) reduce to the same form.
        let pmq = &p() - &q();
        let ppq = &p() + &q();
        let x = p().checked_div(&pmq).unwrap();
        let y = (&p() * &ppq).checked_div(&(&pmq * &ppq)).unwrap();
        assert_eq!(x, y);
        assert!((&(&x.numerator().mul(y.denominator())).sub(&y.numerator().mul(x.denominator())))
            .is_zero());
    }

    #[test]
    fn display_form() {
        let s = (&p() + &Scalar::one()).checked_div(&(&p() - &q())).unwrap();
        assert_eq!(s.to_string(), "(p + 1)/(p - q)");
    }
}

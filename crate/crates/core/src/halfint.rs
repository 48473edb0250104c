//! Half-integers, stored as twice their value. Mode indices, bracket
//! weights and lambda orders all live here so that m - 1/2 style arithmetic
//! stays exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    /// Construct from a count of halves (new(3) == 3/2).
    pub fn new(halves: i64) -> Self {
        HalfInt(halves)
    }

    pub fn from_int(n: i64) -> Self {
        HalfInt(2 * n)
    }

    pub fn half() -> Self {
        HalfInt(1)
    }

    pub fn halves(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn as_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.0), BigInt::from(2))
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 2 {
                return Some(HalfInt(n));
            }
            if d == 1 {
                return Some(HalfInt::from_int(n));
            }
            return None;
        }
        s.parse::<i64>().ok().map(HalfInt::from_int)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl Mul<i64> for HalfInt {
    type Output = HalfInt;
    fn mul(self, rhs: i64) -> HalfInt {
        HalfInt(self.0 * rhs)
    }
}

impl Sum for HalfInt {
    fn sum<I: Iterator<Item = HalfInt>>(iter: I) -> HalfInt {
        HalfInt(iter.map(|h| h.0).sum())
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        HalfInt::from_int(n)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

//! Exact integer and rational helpers used by the combinatorial code.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // Each partial product is itself a binomial coefficient, so the division is exact.
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// A probability carried both as an exact rational and as its nearest double.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProbability {
    ratio: BigRational,
}

impl ExactProbability {
    pub fn new(num: BigUint, den: BigUint) -> Self {
        assert!(!den.is_zero(), "probability with zero denominator");
        Self {
            ratio: BigRational::new(BigInt::from(num), BigInt::from(den)),
        }
    }

    pub fn from_ratio(ratio: BigRational) -> Self {
        Self { ratio }
    }

    pub fn zero() -> Self {
        Self::from_ratio(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_ratio(BigRational::one())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    pub fn numer(&self) -> &BigInt {
        self.ratio.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.ratio.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.ratio.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_one(&self) -> bool {
        self.ratio.is_one()
    }

    pub fn min(self, other: Self) -> Self {
        if self.ratio <= other.ratio {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExactProbability {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.ratio.cmp(&other.ratio))
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ratio.denom().is_one() {
            write!(f, "{}", self.ratio.numer())
        } else {
            write!(f, "{}/{}", self.ratio.numer(), self.ratio.denom())
        }
    }
}

/// Serialized as `{numerator, denominator, value}` with the integers as decimal strings.
impl Serialize for ExactProbability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ExactProbability", 3)?;
        s.serialize_field("numerator", &self.ratio.numer().to_string())?;
        s.serialize_field("denominator", &self.ratio.denom().to_string())?;
        s.serialize_field("value", &self.to_f64())?;
        s.end()
    }
}

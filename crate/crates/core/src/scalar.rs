//! Scalar abstraction shared by the simplex solver and the bound formulas.
//!
//! Floating types carry a pivot tolerance; exact rationals use zero, so every
//! comparison in the solver becomes an exact sign test.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered field element usable by the LP solver.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Absolute tolerance used for pivoting and optimality tests.
    fn tolerance() -> Self;

    /// True when arithmetic is exact (no rounding).
    fn is_exact() -> bool;

    fn from_f64_lossy(value: f64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_f64_lossy(numer as f64) / Self::from_f64_lossy(denom as f64)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn is_exact() -> bool {
        false
    }

    fn from_f64_lossy(value: f64) -> Self {
        value
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn is_exact() -> bool {
        false
    }

    fn from_f64_lossy(value: f64) -> Self {
        value as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    /// Exact binary expansion of the float.
    fn from_f64_lossy(value: f64) -> Self {
        BigRational::from_f64(value).expect("finite float")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }
}

/// Convenience: exact rational from a small fraction.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

//! Scalar abstractions shared by the linear algebra and tradeoff code.
//!
//! Two families of number types flow through this crate:
//!
//! * [`Field`]: anything with exact `+ - *` and a partial inverse. Finite
//!   fields and the rationals both qualify, so the dense matrix code in
//!   [`crate::linalg`] runs unchanged over `GF(2^8)` and over `Ratio<i128>`.
//! * [`Scalar`]: an ordered field (rationals, floats) used for the
//!   storage/bandwidth tradeoff where comparisons matter.

use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact field arithmetic.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Multiplicative inverse, `None` for zero.
    fn try_inv(&self) -> Option<Self>;
}

/// An ordered field used for exact (or approximate, for floats) tradeoff math.
pub trait Scalar: Field + PartialOrd + Signed + Display {
    fn from_int(v: i64) -> Self;

    fn from_frac(num: i64, den: i64) -> Self {
        Self::from_int(num) * Self::from_int(den).try_inv().expect("zero denominator")
    }

    /// Division; panics on a zero divisor like the primitive types do.
    fn div_by(&self, other: &Self) -> Self {
        self.clone() * other.try_inv().expect("division by zero")
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

macro_rules! ratio_impls {
    ($($int:ty),*) => {$(
        impl Field for Ratio<$int> {
            fn try_inv(&self) -> Option<Self> {
                if self.is_zero() { None } else { Some(self.recip()) }
            }
        }

        impl Scalar for Ratio<$int> {
            fn from_int(v: i64) -> Self {
                Ratio::from_integer(<$int>::from(v))
            }
        }
    )*};
}

ratio_impls!(i64, i128, BigInt);

macro_rules! float_impls {
    ($($float:ty),*) => {$(
        impl Field for $float {
            fn try_inv(&self) -> Option<Self> {
                if *self == 0.0 { None } else { Some(1.0 / *self) }
            }
        }

        impl Scalar for $float {
            fn from_int(v: i64) -> Self {
                v as $float
            }
        }
    )*};
}

float_impls!(f32, f64);

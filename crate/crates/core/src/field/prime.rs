use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{FieldError, FieldSpec, FiniteField};
use crate::scalar::Field;

pub(crate) const fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= p as u64 {
        if (p as u64).is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Integers modulo a prime `P < 2^31`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Fp<const P: u32>(u32);

impl<const P: u32> Fp<P> {
    const CHECK: () = assert!(
        P < (1 << 31) && is_prime(P),
        "modulus must be a prime below 2^31"
    );

    pub fn new(v: u64) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::CHECK;
        Fp((v % P as u64) as u32)
    }
}

impl<const P: u32> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.0, P)
    }
}

impl<const P: u32> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u32> Add for Fp<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fp(((self.0 as u64 + rhs.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fp(((self.0 as u64 + P as u64 - rhs.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp::<P>::zero() - self
    }
}

impl<const P: u32> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fp(((self.0 as u64 * rhs.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u32> One for Fp<P> {
    fn one() -> Self {
        Fp::new(1)
    }
}

impl<const P: u32> Field for Fp<P> {
    fn try_inv(&self) -> Option<Self> {
        // Fermat: a^(p-2)
        (self.0 != 0).then(|| FiniteField::pow(*self, P as u64 - 2))
    }
}

impl<const P: u32> FiniteField for Fp<P> {
    const ORDER: u64 = P as u64;
    const BYTES: usize = 4;

    fn spec() -> FieldSpec {
        FieldSpec::Prime { order: P }
    }

    fn from_value(v: u64) -> Result<Self, FieldError> {
        if v >= P as u64 {
            return Err(FieldError::OutOfRange {
                value: v,
                field: Self::spec(),
            });
        }
        Ok(Fp::new(v))
    }

    fn value(self) -> u64 {
        self.0 as u64
    }
}

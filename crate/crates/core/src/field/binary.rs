use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use num_traits::{One, Zero};

use super::{FieldError, FieldSpec, FiniteField};
use crate::scalar::Field;

/// x^8 + x^4 + x^3 + x^2 + 1
pub const GF256_MODULUS: u32 = 0x11D;
/// x^16 + x^12 + x^3 + x + 1
pub const GF65536_MODULUS: u32 = 0x1100B;

/// Log/antilog tables for a binary extension field whose modulus is
/// primitive, so `x` generates the multiplicative group.
struct Tables {
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl Tables {
    fn build(degree: u32, modulus: u32) -> Tables {
        let order = 1usize << degree;
        let group = order - 1;
        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; order];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().take(group).enumerate() {
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << degree) != 0 {
                x ^= modulus;
            }
        }
        assert_eq!(x, 1, "modulus {modulus:#x} is not primitive");
        for i in group..2 * group {
            exp[i] = exp[i - group];
        }
        Tables { exp, log }
    }
}

static GF256_TABLES: LazyLock<Tables> = LazyLock::new(|| Tables::build(8, GF256_MODULUS));
static GF65536_TABLES: LazyLock<Tables> = LazyLock::new(|| Tables::build(16, GF65536_MODULUS));

macro_rules! binary_field {
    ($name:ident, $repr:ty, $degree:expr, $modulus:expr, $tables:ident) => {
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
        pub struct $name(pub $repr);

        impl $name {
            const GROUP: usize = (1usize << $degree) - 1;
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:#x})", stringify!($name), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl Add for $name {
            type Output = Self;
            #[inline]
            #[allow(clippy::suspicious_arithmetic_impl)]
            fn add(self, rhs: Self) -> Self {
                $name(self.0 ^ rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            #[inline]
            #[allow(clippy::suspicious_arithmetic_impl)]
            fn sub(self, rhs: Self) -> Self {
                $name(self.0 ^ rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                self
            }
        }

        impl Mul for $name {
            type Output = Self;
            #[inline]
            fn mul(self, rhs: Self) -> Self {
                if self.0 == 0 || rhs.0 == 0 {
                    return $name(0);
                }
                let t = &*$tables;
                let idx = t.log[self.0 as usize] as usize + t.log[rhs.0 as usize] as usize;
                $name(t.exp[idx] as $repr)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }

        impl SubAssign for $name {
            fn sub_assign(&mut self, rhs: Self) {
                *self = *self - rhs;
            }
        }

        impl MulAssign for $name {
            fn mul_assign(&mut self, rhs: Self) {
                *self = *self * rhs;
            }
        }

        impl Zero for $name {
            fn zero() -> Self {
                $name(0)
            }
            fn is_zero(&self) -> bool {
                self.0 == 0
            }
        }

        impl One for $name {
            fn one() -> Self {
                $name(1)
            }
        }

        impl Field for $name {
            fn try_inv(&self) -> Option<Self> {
                if self.0 == 0 {
                    return None;
                }
                let t = &*$tables;
                let l = t.log[self.0 as usize] as usize;
                Some($name(t.exp[(Self::GROUP - l) % Self::GROUP] as $repr))
            }
        }

        impl FiniteField for $name {
            const ORDER: u64 = 1u64 << $degree;
            const BYTES: usize = $degree / 8;

            fn spec() -> FieldSpec {
                FieldSpec::BinaryExtension {
                    degree: $degree,
                    modulus: $modulus,
                }
            }

            fn from_value(v: u64) -> Result<Self, FieldError> {
                if v >= Self::ORDER {
                    return Err(FieldError::OutOfRange {
                        value: v,
                        field: Self::spec(),
                    });
                }
                Ok($name(v as $repr))
            }

            fn value(self) -> u64 {
                self.0 as u64
            }

            fn pow(self, exp: u64) -> Self {
                if exp == 0 {
                    return $name(1);
                }
                if self.0 == 0 {
                    return $name(0);
                }
                let t = &*$tables;
                let l = t.log[self.0 as usize] as u64;
                $name(
                    t.exp[((l * (exp % Self::GROUP as u64)) % Self::GROUP as u64) as usize]
                        as $repr,
                )
            }
        }
    };
}

binary_field!(Gf256, u8, 8, GF256_MODULUS, GF256_TABLES);
binary_field!(Gf65536, u16, 16, GF65536_MODULUS, GF65536_TABLES);

//! Finite fields used by the code construction.
//!
//! Two binary extension fields with fixed canonical moduli (so stored symbols
//! are portable) and a const-generic prime field for small hand-checkable
//! examples.

mod binary;
mod prime;

use std::fmt;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Field;

pub use binary::{Gf256, Gf65536, GF256_MODULUS, GF65536_MODULUS};
pub use prime::Fp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value} is not an element of {field}")]
    OutOfRange { value: u64, field: FieldSpec },
    #[error("expected {expected} bytes per symbol, got {got}")]
    ByteLength { expected: usize, got: usize },
    #[error("unsupported field description: {0}")]
    Unsupported(String),
}

/// Portable description of a field, recorded in cluster manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    BinaryExtension { degree: u32, modulus: u32 },
    Prime { order: u32 },
}

impl FieldSpec {
    pub const GF256: FieldSpec = FieldSpec::BinaryExtension {
        degree: 8,
        modulus: GF256_MODULUS,
    };
    pub const GF65536: FieldSpec = FieldSpec::BinaryExtension {
        degree: 16,
        modulus: GF65536_MODULUS,
    };

    pub fn order(&self) -> u64 {
        match *self {
            FieldSpec::BinaryExtension { degree, .. } => 1u64 << degree,
            FieldSpec::Prime { order } => order as u64,
        }
    }

    pub fn symbol_bytes(&self) -> usize {
        match *self {
            FieldSpec::BinaryExtension { degree, .. } => degree as usize / 8,
            FieldSpec::Prime { .. } => 4,
        }
    }

    /// Reject anything other than the two canonical binary fields or a prime
    /// below 2^31.
    pub fn validate(&self) -> Result<(), FieldError> {
        match *self {
            FieldSpec::BinaryExtension {
                degree: 8,
                modulus: GF256_MODULUS,
            }
            | FieldSpec::BinaryExtension {
                degree: 16,
                modulus: GF65536_MODULUS,
            } => Ok(()),
            FieldSpec::Prime { order } if order < (1 << 31) && prime::is_prime(order) => Ok(()),
            other => Err(FieldError::Unsupported(other.to_string())),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FieldSpec::BinaryExtension { degree, modulus } => {
                write!(f, "GF(2^{degree}) mod {modulus:#x}")
            }
            FieldSpec::Prime { order } => write!(f, "GF({order})"),
        }
    }
}

/// A finite field with a fixed, statically known order.
///
/// Elements are `Copy` handles around their canonical integer value; mixing
/// elements of different fields is a type error.
pub trait FiniteField: Field + Copy + Eq + Hash + Send + Sync + fmt::Display + 'static {
    const ORDER: u64;
    /// Serialized width of one symbol, little-endian.
    const BYTES: usize;

    fn spec() -> FieldSpec;

    /// The element with canonical value `v`.
    fn from_value(v: u64) -> Result<Self, FieldError>;

    fn value(self) -> u64;

    fn inv(self) -> Result<Self, FieldError> {
        self.try_inv().ok_or(FieldError::ZeroInverse)
    }

    fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// The `i`-th element in canonical order, used to pick distinct
    /// evaluation points deterministically.
    fn element(i: u64) -> Self {
        Self::from_value(i).expect("element index beyond field order")
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::element(rng.gen_range(0..Self::ORDER))
    }

    fn random_nonzero<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::element(rng.gen_range(1..Self::ORDER))
    }

    fn write_bytes(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.value().to_le_bytes()[..Self::BYTES]);
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, FieldError> {
        if bytes.len() != Self::BYTES {
            return Err(FieldError::ByteLength {
                expected: Self::BYTES,
                got: bytes.len(),
            });
        }
        let mut buf = [0u8; 8];
        buf[..Self::BYTES].copy_from_slice(bytes);
        Self::from_value(u64::from_le_bytes(buf))
    }
}

/// Serialize a slice of symbols.
pub fn symbols_to_bytes<F: FiniteField>(symbols: &[F]) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * F::BYTES);
    for s in symbols {
        s.write_bytes(&mut out);
    }
    out
}

pub fn symbols_from_bytes<F: FiniteField>(bytes: &[u8]) -> Result<Vec<F>, FieldError> {
    if !bytes.len().is_multiple_of(F::BYTES) {
        return Err(FieldError::ByteLength {
            expected: F::BYTES,
            got: bytes.len() % F::BYTES,
        });
    }
    bytes.chunks_exact(F::BYTES).map(F::from_bytes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_orders() {
        assert_eq!(FieldSpec::GF256.order(), 256);
        assert_eq!(FieldSpec::GF65536.order(), 65536);
        assert_eq!(FieldSpec::Prime { order: 7 }.order(), 7);
        assert_eq!(Gf256::spec(), FieldSpec::GF256);
        assert_eq!(Fp::<7>::spec(), FieldSpec::Prime { order: 7 });
    }

    #[test]
    fn validate_rejects_foreign_moduli() {
        assert!(FieldSpec::GF256.validate().is_ok());
        assert!(FieldSpec::BinaryExtension {
            degree: 8,
            modulus: 0x11B
        }
        .validate()
        .is_err());
        assert!(FieldSpec::Prime { order: 9 }.validate().is_err());
        assert!(FieldSpec::Prime { order: 65537 }.validate().is_ok());
    }

    #[test]
    fn spec_json_shape() {
        let json = serde_json::to_string(&FieldSpec::GF256).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"binary_extension","degree":8,"modulus":285}"#
        );
        let back: FieldSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, FieldSpec::GF256);
    }

    #[test]
    fn short_buffer_rejected() {
        assert_eq!(
            Gf65536::from_bytes(&[1]),
            Err(FieldError::ByteLength {
                expected: 2,
                got: 1
            })
        );
        assert!(symbols_from_bytes::<Gf65536>(&[1, 2, 3]).is_err());
    }
}

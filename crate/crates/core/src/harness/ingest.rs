//! Turning files into exactly `B` message symbols and back.

use super::store::Ingest;
use super::HarnessError;
use crate::field::{symbols_from_bytes, symbols_to_bytes, FiniteField};

const HEADER: usize = 4;

/// Largest file that fits in `b` symbols of `F` under `mode`.
pub fn capacity<F: FiniteField>(b: usize, mode: Ingest) -> usize {
    match mode {
        Ingest::Framed => (b * F::BYTES).saturating_sub(HEADER),
        Ingest::Raw => b * F::BYTES,
    }
}

pub fn to_message<F: FiniteField>(
    bytes: &[u8],
    b: usize,
    mode: Ingest,
) -> Result<Vec<F>, HarnessError> {
    let total = b * F::BYTES;
    let mut buf = match mode {
        Ingest::Framed => {
            let cap = capacity::<F>(b, mode);
            if bytes.len() > cap || bytes.len() > u32::MAX as usize {
                return Err(HarnessError::Validation(format!(
                    "file has {} bytes but B = {b} symbols hold at most {cap} bytes",
                    bytes.len()
                )));
            }
            let mut buf = (bytes.len() as u32).to_le_bytes().to_vec();
            buf.extend_from_slice(bytes);
            buf
        }
        Ingest::Raw => {
            if bytes.len() != total {
                return Err(HarnessError::Validation(format!(
                    "message must be exactly B = {b} symbols ({total} bytes), got {} bytes",
                    bytes.len()
                )));
            }
            bytes.to_vec()
        }
    };
    buf.resize(total, 0);
    Ok(symbols_from_bytes(&buf)?)
}

pub fn from_message<F: FiniteField>(message: &[F], mode: Ingest) -> Result<Vec<u8>, HarnessError> {
    let bytes = symbols_to_bytes(message);
    match mode {
        Ingest::Raw => Ok(bytes),
        Ingest::Framed => {
            let len = bytes
                .get(..HEADER)
                .map(|h| u32::from_le_bytes(h.try_into().expect("four bytes")) as usize)
                .ok_or_else(|| HarnessError::Integrity("message shorter than its header".into()))?;
            bytes
                .get(HEADER..HEADER + len)
                .map(|s| s.to_vec())
                .ok_or_else(|| HarnessError::Integrity(format!("header claims {len} bytes")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf256, Gf65536};

    #[test]
    fn framed_roundtrip() {
        for len in [0usize, 1, 13, 14] {
            let data: Vec<u8> = (0..len as u8).collect();
            let m = to_message::<Gf256>(&data, 18, Ingest::Framed).unwrap();
            assert_eq!(m.len(), 18);
            assert_eq!(from_message(&m, Ingest::Framed).unwrap(), data);
        }
        assert!(matches!(
            to_message::<Gf256>(&[0; 15], 18, Ingest::Framed),
            Err(HarnessError::Validation(s)) if s.contains("B = 18")
        ));
        let m = to_message::<Gf65536>(&[7; 31], 18, Ingest::Framed).unwrap();
        assert_eq!(from_message(&m, Ingest::Framed).unwrap(), vec![7; 31]);
    }

    #[test]
    fn raw_requires_exact_length() {
        let m = to_message::<Gf256>(&[5; 18], 18, Ingest::Raw).unwrap();
        assert_eq!(from_message(&m, Ingest::Raw).unwrap(), vec![5; 18]);
        assert!(to_message::<Gf256>(&[5; 17], 18, Ingest::Raw).is_err());
        assert!(to_message::<Gf65536>(&[5; 35], 18, Ingest::Raw).is_err());
    }

    #[test]
    fn bad_header() {
        let mut bytes = vec![0u8; 18];
        bytes[0] = 200;
        let m: Vec<Gf256> = symbols_from_bytes(&bytes).unwrap();
        assert!(matches!(
            from_message(&m, Ingest::Framed),
            Err(HarnessError::Integrity(_))
        ));
    }
}

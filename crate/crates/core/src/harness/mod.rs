//! Cluster persistence, failure scenarios and the command-line front end.

pub mod cli;
pub mod ingest;
pub mod scenario;
pub mod store;

use thiserror::Error;

use crate::codec::CodecError;
use crate::field::{FieldError, FieldSpec};
use crate::ifg::IfgError;
use crate::params::ParamError;

pub use scenario::{run_scenario, Report, Round, RoundLedger, Scenario};
pub use store::{load, read_manifest, save, Ingest, Manifest, LAYOUT_VERSION};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("layout version {found} is not supported (expected {expected})")]
    Version { found: u64, expected: u32 },
    #[error("content digest mismatch: manifest {expected}, files {actual}")]
    Digest { expected: String, actual: String },
    #[error("cluster is stored over {stored}, not {requested}")]
    FieldMismatch {
        stored: FieldSpec,
        requested: FieldSpec,
    },
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ifg(#[from] IfgError),
}

impl HarnessError {
    /// 1 for bad input, 2 for integrity or assertion failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_)
            | HarnessError::Io(_)
            | HarnessError::Manifest(_)
            | HarnessError::FieldMismatch { .. }
            | HarnessError::Params(_)
            | HarnessError::Field(_)
            | HarnessError::Ifg(_) => 1,
            HarnessError::Codec(e) => match e {
                CodecError::Integrity(_) | CodecError::VerificationExhausted { .. } => 2,
                _ => 1,
            },
            HarnessError::Version { .. }
            | HarnessError::Digest { .. }
            | HarnessError::Integrity(_)
            | HarnessError::Assertion(_) => 2,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point X0 = {x0} lies within {margin} of the singular point (1/c)^(1/3)")]
    SingularPoint { x0: f64, margin: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("basis is degenerate (columns linearly dependent)")]
    DegenerateBasis,

    #[error("bounding box holds {points} integer points, above the cap of {cap}")]
    BoxTooLarge { points: u128, cap: u128 },

    #[error("no admissible X0 after {attempts} draws; check the sampling range")]
    SamplingExhausted { attempts: usize },

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("invalid targets: {0}")]
    InvalidTargets(String),

    #[error("corrupt checkpoint {path}: {msg}")]
    CorruptCheckpoint { path: PathBuf, msg: String },

    #[error("checkpoint {path} was written for a different configuration")]
    ConfigMismatch { path: PathBuf },

    #[error("record does not satisfy d = c*x^3 + y^3 + z^3: {0}")]
    InvalidRecord(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 2 for persistence and I/O failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::CorruptCheckpoint { .. } => 2,
            _ => 1,
        }
    }
}

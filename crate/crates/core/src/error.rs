use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is numerically rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("triangular system has a singular diagonal at index {index}")]
    SingularDiagonal { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ISI band would need {needed} taps, more than the cap of {cap}")]
    BandTooLong { needed: usize, cap: usize },

    #[error("block of {n} symbols is too large for exhaustive search (max {max})")]
    BlockTooLarge { n: usize, max: usize },

    #[error("SDP solver did not converge after {iterations} sweeps (last relative decrease {last_decrease:e})")]
    NotConverged { iterations: usize, last_decrease: f64 },

    #[error("target BER {target:e} is not reached even at tau = 1 (measured {measured:e})")]
    TargetUnreachable { target: f64, measured: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

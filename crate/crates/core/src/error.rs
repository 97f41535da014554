use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has zero norm and cannot be normalized")]
    DegenerateVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("columns are linearly dependent (pivot norm {pivot:e} at column {column})")]
    RankDeficient { column: usize, pivot: f64 },
    #[error("matrix is singular (smallest singular value {0:e})")]
    SingularMatrix(f64),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("measurement requires at least one shot")]
    EmptyEnsemble,
    #[error("gain coefficient must be positive, got {0}")]
    InvalidGain(f64),
    #[error("CSPSA iterate collapsed to zero norm at iteration {0}")]
    DegenerateIterate(usize),
    #[error("no data to process")]
    EmptyData,
    #[error("objective is not finite at the starting point")]
    InvalidStart,
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("malformed sparse structure: {0}")]
    Structure(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate recurrence: zero denominator at n = {n}")]
    DegenerateRecurrence { n: usize },

    #[error("incomplete factorization pivot breakdown at row {row}")]
    PivotBreakdown { row: usize },

    #[error("matrix is not positive definite (pivot {row})")]
    NotSpd { row: usize },

    #[error("matrix too large for dense path: {n} > {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("inner solve failed: {0}")]
    InnerSolve(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::dim(expected, found))
    }
}

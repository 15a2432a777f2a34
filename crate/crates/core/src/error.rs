use thiserror::Error;

/// Errors raised by the discretization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the domain of the function: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvalue iteration did not converge for index {0}")]
    EigenNoConvergence(usize),
    #[error("oracle did not converge: {0}")]
    OracleFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} bodies, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("degree error: {0}")]
    Degree(String),
    #[error("body is not centrally symmetric: {0}")]
    NotSymmetric(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical check failed: {0}")]
    Numerical(String),
    #[error("cross-route mismatch: {0}")]
    CrossRoute(String),
}

pub type Result<T> = std::result::Result<T, Error>;

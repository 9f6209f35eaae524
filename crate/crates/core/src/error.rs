use alloc::string::String;

/// Errors raised by the analysis, reduction and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("malformed system: {0}")]
    Malformed(String),
    #[error("INVALID_TAILS: {0}")]
    InvalidTails(String),
    #[error("NUMERICALLY_AMBIGUOUS: {0}")]
    NumericallyAmbiguous(String),
    #[error("NOT_PARTIALLY_STRICT: {0}")]
    NotPartiallyStrict(String),
    #[error("SCALE_TOO_SMALL: {0}")]
    ScaleTooSmall(String),
    #[error("trailing block not positive definite: {0}")]
    TrailingNotPd(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("part {index} is not strictly positive: {value}")]
    NonPositivePart { index: usize, value: f64 },

    #[error("non-finite value at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("a composition needs at least 2 parts, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty selection")]
    EmptySelection,

    #[error("vector is not in the clr tangent space (sum = {sum:e})")]
    NotInTangentSpace { sum: f64 },

    #[error("invalid sequential binary partition: {0}")]
    InvalidPartition(String),

    #[error("coordinates out of domain: {0}")]
    OutOfDomain(String),

    #[error("coordinates leave the potential's domain: {0}")]
    CoordinateDomain(String),

    #[error("geodesic parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("tangent vectors are attached to different base points")]
    BasePointMismatch,

    #[error("weight {index} is negative: {value}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("invalid part subset: {0}")]
    InvalidSubset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("uniform ellipticity violated at element {element}: lower bound {lower_bound}")]
    UeaViolation { element: usize, lower_bound: f64 },

    #[error("matrix not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("index set is not downward closed: {0} is missing")]
    NotMonotone(String),

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("posterior normalization is non-positive (Z = {0}); truncation too aggressive")]
    NonPositiveNormalization(f64),

    #[error("observation window [{lo}, {hi}] is not a subinterval of [0, 1] with positive length")]
    BadWindow { lo: f64, hi: f64 },

    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, GpcError>;

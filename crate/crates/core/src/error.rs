use thiserror::Error;

/// Errors raised by the measure, transform, metric and inequality routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("negative weight {weight} at index {index}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("weights sum to {0}, outside 1 ± 1e-9")]
    WeightSum(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("marginals differ beyond tolerance {tol}")]
    MarginalsDiffer { tol: f64 },

    #[error("copula grid does not match marginal CDF grid: {0}")]
    GridMismatch(String),

    #[error("invalid step function: {0}")]
    InvalidStep(String),

    #[error("test function is not admissible: {0}")]
    NotMonotone(String),

    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),

    #[error("linear program ended with status {0:?}")]
    LpFailure(crate::lp::LpStatus),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

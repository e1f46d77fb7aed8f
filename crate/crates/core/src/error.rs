use thiserror::Error;

/// Errors raised by model construction, differentiation and the metric computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error in model `{model}`: parameter {param} = {value} outside admissible range {range}")]
    Domain {
        model: String,
        param: usize,
        value: f64,
        range: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("SLD solve failed: support-block residual {residual:e} exceeds {tolerance:e} (parameter {param})")]
    SolverFailure {
        param: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("internal consistency error: {what} residual {residual:e} exceeds {tolerance:e}")]
    Consistency {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

use thiserror::Error;

/// Errors raised by the solvers and the model/grid primitives.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid coefficient {value} at index {index}")]
    Coefficient { index: usize, value: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("non-finite value of {what} at {point}")]
    Evaluation { what: &'static str, point: String },

    #[error("{value} lies outside the domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{solver} did not converge after {iterations} iterations: {detail}")]
    Solver {
        solver: &'static str,
        iterations: usize,
        detail: String,
    },

    #[error("step {step} at t = {t} failed: {reason}")]
    StepFailure { step: usize, t: f64, reason: String },

    #[error("runs are not comparable: {0}")]
    Comparability(String),
}

pub type Result<T> = std::result::Result<T, Error>;

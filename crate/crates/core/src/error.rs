use thiserror::Error;

/// Library-wide error type.
///
/// Variants separate the failure classes callers handle differently:
/// domain violations (caller bug or bad data), accuracy shortfalls that
/// still carry a usable estimate, solver breakdowns with their iteration
/// history, and data/inference problems surfaced with enough context to
/// report a row or matrix condition.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not meet its accuracy target; the best
    /// available estimate is preserved so callers can decide what to do.
    #[error("accuracy target {requested:e} not met (achieved ≈ {achieved:e}); best estimate {estimate}")]
    Accuracy {
        estimate: f64,
        requested: f64,
        achieved: f64,
    },

    /// Root solver failed; `trace` holds the residual ∞-norm per iteration.
    #[error("solver failed after {iterations} iterations: {reason}")]
    Solver {
        reason: String,
        iterations: usize,
        trace: Vec<f64>,
    },

    /// Shape conversion (e.g. trapezoid → beta) could not be carried out.
    #[error("conversion error: {0}")]
    Conversion(String),

    /// Post-fit inference failure (singular information matrix, undefined index).
    #[error("inference error: {0}")]
    Inference(String),

    /// Invalid dataset content (dimension mismatch, out-of-range observation).
    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

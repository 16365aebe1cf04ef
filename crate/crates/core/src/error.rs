use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the crate.
///
/// Variable and signed indices carried by variants are 0-based; the
/// rendered messages use 1-based numbering to match the CLI formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {} appears with both signs", .0 + 1)]
    AntipodalPair(usize),

    #[error("signed index {} out of range for p = {p}", .index + 1)]
    IndexOutOfRange { index: usize, p: usize },

    #[error("model of size {size} exceeds the observation count n = {n}")]
    ModelTooLarge { size: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input contains non-finite values")]
    NonFiniteInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solver did not converge within {max_iters} sweeps")]
    NoConvergence { max_iters: usize },

    #[error("lasso path failed at lambda = {lambda}: {source}")]
    PathFailed {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("linear program is unbounded (design is likely not in general position)")]
    LpUnbounded,

    #[error("linear program exceeded its pivot limit")]
    LpIterationLimit,

    #[error("model is not a face of the hull of the expanded design")]
    NotAFace,

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("true model is empty")]
    EmptyTruth,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::AntipodalPair(_)
                | Error::IndexOutOfRange { .. }
                | Error::ModelTooLarge { .. }
                | Error::DimensionMismatch(_)
                | Error::NonFiniteInput
                | Error::InvalidConfig(_)
                | Error::TooLarge(_)
                | Error::InvalidDims(_)
                | Error::HypothesisViolated(_)
                | Error::DomainError(_)
                | Error::EmptyTruth
                | Error::Parse(_)
        )
    }
}

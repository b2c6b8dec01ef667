use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("granularity error: {0}")]
    Granularity(String),

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("seed error: expected {expected} seeds, got {got}")]
    Seed { expected: usize, got: usize },

    #[error("split error: {0}")]
    Split(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("non-stationary AR polynomial: {0:?}")]
    NonStationary(Vec<f64>),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("optimizer did not converge after {iterations} iterations")]
    OptimizerFailure { iterations: usize },

    #[error("no grid cell produced a converged model")]
    NoConvergedModel,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("matrix not positive definite after jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("no hyperparameter cell could be fitted")]
    NoValidFit,

    #[error("model '{model}' failed at holdout index {index}: {source}")]
    Adapter {
        model: String,
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

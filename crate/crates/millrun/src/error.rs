use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type. Messages are prefixed with the subsystem that
/// produced them so CLI diagnostics can be traced back without a stack trace.
#[derive(Debug, Error)]
pub enum Error {
    #[error("model: {0}")]
    Model(String),

    #[error("demand: demand is zero in period {period}, shortfall fraction undefined")]
    ZeroDemand { period: usize },

    #[error("demand: sales value missing in period {period}")]
    MissingSales { period: usize },

    #[error("demand: {0}")]
    Demand(String),

    #[error("forecast: {model} needs at least {needed} periods, got {got}")]
    InsufficientHistory {
        model: String,
        needed: usize,
        got: usize,
    },

    #[error("forecast: {0}")]
    Forecast(String),

    #[error("capacity: {0}")]
    Capacity(String),

    #[error("schedule: {0}")]
    Schedule(String),

    #[error("solver: search space of {combinations} assignments exceeds limit {limit}; use the greedy or local-search method")]
    SearchSpaceTooLarge { combinations: u128, limit: u64 },

    #[error("solver: {0}")]
    Solver(String),

    #[error("scenario: no critical point in range [{lo} kg, {hi} kg]")]
    NoCriticalPoint { lo: f64, hi: f64 },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("io: {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

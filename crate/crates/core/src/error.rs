use thiserror::Error;

/// Errors raised by the library. Structural problems (bad shapes, invalid
/// distributions, budgets) are distinguished from solver failures so callers
/// can escalate the latter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidProfile(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} of size {size} exceeds the budget of {limit}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("path is empty")]
    EmptyPath,

    #[error("no equilibrium found by {method} (best residual {best_residual:e})")]
    NoEquilibrium { method: &'static str, best_residual: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

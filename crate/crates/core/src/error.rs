use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("{what} index {index} out of range (size {size})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("capacity exceeded: {needed} entries requested, limit is {limit}")]
    Capacity { needed: u128, limit: u128 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("value iteration did not converge after {iterations} iterations (span {span:e}, tolerance {tolerance:e})")]
    NonConvergence {
        iterations: usize,
        span: f64,
        tolerance: f64,
    },

    #[error("target state {target} is unreachable from state {from}")]
    Unreachable { target: usize, from: usize },

    #[error("model is not a Cartesian product: {0}")]
    NotCartesian(String),

    #[error("mismatched checkpoint grids: {0}")]
    CheckpointMismatch(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid module spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("empty design: {0}")]
    EmptyDesign(String),

    #[error("configuration limit exceeded: {count} configurations > limit {limit}")]
    LimitExceeded { count: num_bigint::BigUint, limit: u64 },

    #[error("memory limit exceeded: {0}")]
    MemoryLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: field `{field}`: {message}")]
    Validation { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

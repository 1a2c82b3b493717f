use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degenerate design: {0}")]
    DegenerateMatrix(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("quasi-complete separation: {0}")]
    Separation(String),

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("series of length {len} is too short (need at least 3)")]
    SeriesTooShort { len: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("generator parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("generator matrix is rank deficient (rank {rank} < k = {k})")]
    RankDeficient { rank: usize, k: usize },

    #[error("code dimension k = {k} exceeds the limit of {max}")]
    CodeTooLarge { k: usize, max: usize },

    #[error("message index {index} out of range for a code of size {size}")]
    MessageOutOfRange { index: usize, size: usize },

    #[error("statistic requires a non-empty preamble")]
    EmptyPreamble,

    #[error("detector requires a codebook")]
    MissingCodebook,

    #[error("too few trials: need at least {needed}, got {got}")]
    InsufficientTrials { needed: u64, got: u64 },

    #[error("infeasible: {0}")]
    Infeasible(String),
}

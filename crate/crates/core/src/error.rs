use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("not a morphism: the resultant of the coordinate forms vanishes")]
    NotAMorphism,

    #[error("degree {degree} is below the required threshold {threshold}")]
    BelowThreshold { degree: u64, threshold: u64 },

    #[error("resource cap exceeded: {what} (limit {limit}, partial progress {partial})")]
    ResourceCap {
        what: String,
        limit: usize,
        partial: usize,
    },

    #[error("precondition violated at index {index}: {reason}")]
    Precondition { index: usize, reason: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("rank deficiency: reached rank {rank} of {target}: {detail}")]
    RankDeficient {
        rank: usize,
        target: usize,
        detail: String,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            line: 1,
            column: 1,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input text.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

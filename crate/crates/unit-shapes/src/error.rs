//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid prime/rank configuration or mismatched configs between operands.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input violates an operation precondition (wrong length, bad shape, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Mathematically degenerate input (vanishing norm form, non-positive-definite
    /// Gram, point on the real axis, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Rank-deficient matrix where full rank is required.
    #[error("rank error: {0}")]
    Rank(String),

    /// Field record fails a structural check (signature, unit count, degree).
    #[error("data error: {0}")]
    Data(String),

    /// Malformed JSON / polynomial string / CSV input.
    #[error("parse error: {0}")]
    Parse(String),

    /// HTTP transport failure with no usable cache.
    #[error("network error: {0}")]
    Network(String),

    /// A bounded search ran out of candidates; distinct from a negative result.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// Requested precision is too low or an iteration failed to converge at it.
    #[error("precision error: {0}")]
    Precision(String),

    /// Pipeline stage failure, tagged with the stage that produced it.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

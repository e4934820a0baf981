use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("logarithm of a non-positive number")]
    NonPositiveLog,

    /// The enclosure never separated from the decision boundary, even at `bits`.
    #[error("precision exhausted at {bits} bits without a certified decision")]
    PrecisionExhausted { bits: u32 },

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no admissible convergent: {0}")]
    NoAdmissibleConvergent(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

use thiserror::Error;

/// Errors raised for malformed inputs and unmet preconditions.
///
/// Structural problems inside a well-formed model (an accessibility relation
/// that is not transitive, a belief that is not cautious, ...) are reported as
/// [`crate::Violation`] values instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown {kind} {label:?}")]
    Unknown { kind: &'static str, label: String },

    #[error("precondition failed ({condition}): {detail}")]
    Precondition {
        condition: &'static str,
        detail: String,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn precondition(condition: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            condition,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the model, inference, engine and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration field failed validation.
    #[error("invalid `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    /// The operation was called in a way its contract forbids.
    #[error("usage error: {0}")]
    Usage(String),

    /// Outcomes were submitted for a cohort other than the pending one.
    #[error("expected outcomes for cohort {expected}, got cohort {got}")]
    WrongCohort { expected: usize, got: usize },

    /// The trial has already finished.
    #[error("trial is no longer enrolling: {0}")]
    TrialClosed(String),
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use copula_crm::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("trial {0} not found")]
    NotFound(String),
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{0}")]
    Conflict(String),
    #[error("event log of trial {trial}: {message}")]
    CorruptLog { trial: String, message: String },
    #[error("{0}")]
    Engine(CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Validation { .. } => "validation",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::CorruptLog { .. } => "corrupt_log",
            ServiceError::Engine(_) => "engine",
            ServiceError::Io(_) => "io",
        }
    }
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidConfig { field, message } => ServiceError::Validation { field, message },
            CoreError::WrongCohort { .. } | CoreError::TrialClosed(_) => ServiceError::Conflict(e.to_string()),
            other => ServiceError::Engine(other),
        }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

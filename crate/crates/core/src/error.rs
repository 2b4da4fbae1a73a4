use thiserror::Error;

/// Errors raised by the solvers and the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("{operation}: singular at {location}")]
    Singularity { operation: String, location: String },

    #[error("{operation}: unsupported configuration: {reason}")]
    Unsupported { operation: String, reason: String },

    #[error("{operation}: outside domain: {reason}")]
    Domain { operation: String, reason: String },

    #[error("{operation}: integration did not converge (achieved {achieved:.3e}, requested {requested:.3e})")]
    Integration {
        operation: String,
        achieved: f64,
        requested: f64,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn singularity(operation: impl Into<String>, location: impl Into<String>) -> Self {
        Error::Singularity {
            operation: operation.into(),
            location: location.into(),
        }
    }

    pub fn unsupported(operation: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Unsupported {
            operation: operation.into(),
            reason: reason.into(),
        }
    }

    pub fn domain(operation: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            operation: operation.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Unsupported { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

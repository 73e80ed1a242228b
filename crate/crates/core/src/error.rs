use thiserror::Error;

/// Errors raised by construction and validation of domain objects.
///
/// Divergent potentials are not errors: every evaluator returns
/// `f64::INFINITY` instead and callers propagate it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    /// A structural admissibility predicate failed. `predicate` carries the
    /// mathematical condition verbatim so front ends can cite it.
    #[error("admissibility violated: requires {predicate} ({detail})")]
    Admissibility { predicate: String, detail: String },
}

impl Error {
    pub fn invalid(name: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            message: message.into(),
        }
    }

    pub fn admissibility(predicate: &str, detail: impl Into<String>) -> Self {
        Error::Admissibility {
            predicate: predicate.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

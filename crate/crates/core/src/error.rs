use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested accuracy could not be reached within the configured limits.
    #[error("accuracy error: {message} (achieved bound {achieved:.3e})")]
    Accuracy { message: String, achieved: f64 },

    /// The problem size exceeds a configured resource cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// The result is not representable as an `f64`.
    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn accuracy(msg: impl Into<String>, achieved: f64) -> Self {
        Error::Accuracy {
            message: msg.into(),
            achieved,
        }
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// `InvalidInput` and `Domain` are caller mistakes (bad shapes, violated
/// preconditions); `Numerical` and `Resolution` are failures of the
/// computation itself on otherwise valid input.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure at sample {index}: {reason}")]
    Numerical { index: usize, reason: String },

    #[error("resolution cap exceeded: {0}")]
    Resolution(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(index: usize, reason: impl Into<String>) -> Self {
        Error::Numerical {
            index,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's input rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

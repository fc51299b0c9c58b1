use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical overflow: {0}")]
    Overflow(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl LevyError {
    /// True for errors caused by bad inputs rather than failing numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, LevyError::Domain(_) | LevyError::InvalidInput(_) | LevyError::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, LevyError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LevyError::Domain(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LevyError::InvalidInput(msg.into()))
}

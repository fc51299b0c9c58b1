use levyq::LevyError;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Data { path: String, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] LevyError),
}

impl CliError {
    /// 1 for bad input of any kind, 2 when valid input hit a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub(crate) fn data(path: &Path, msg: impl Into<String>) -> Self {
        CliError::Data { path: path.display().to_string(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{failed} of {requested} realizations failed (limit 1%)")]
    TooManyFailures { failed: usize, requested: usize },

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] ffcirc::Error),
}

impl RunError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::TooManyFailures { .. } => 3,
            RunError::Divergence(_) | RunError::Core(ffcirc::Error::Divergence { .. }) => 4,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| RunError::Io { path, source }
    }

    pub(crate) fn data(path: impl Into<PathBuf>, reason: impl std::fmt::Display) -> Self {
        RunError::Data {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;

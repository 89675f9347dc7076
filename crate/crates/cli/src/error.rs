use std::path::PathBuf;

use semcache_core::pipeline::CheckpointError;
use semcache_core::{CacheError, PipelineError, PromptError};

/// Everything that can go wrong reading inputs or running the harness. All
/// variants map to exit status 2; expectation mismatches are not errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.to_string(),
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, EngineError>;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("config: {0}")]
    Config(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Core(#[from] kss_core::KssError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("existing output in {0} was produced by a different configuration")]
    ResumeMismatch(PathBuf),

    #[error("{count} replicate(s) failed; see the manifest")]
    PartialFailure { count: usize },

    #[error("{count} uncertified count(s) with --strict")]
    Uncertified { count: usize },

    #[error("worker pool: {0}")]
    Pool(String),
}

impl EngineError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Parse { .. } => 2,
            Self::PartialFailure { .. } => 3,
            Self::Uncertified { .. } => 4,
            _ => 1,
        }
    }
}

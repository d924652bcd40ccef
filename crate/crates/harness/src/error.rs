use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Malformed or inconsistent configuration.
    #[error("config: {0}")]
    Config(String),
    #[error("dataset unavailable: {0}")]
    DatasetMissing(String),
    #[error("no checkpoint at {0}; run `mirp train` with the same config first")]
    MissingCheckpoint(String),
    #[error("checkpoint {path} was trained under a different configuration (model hash {found}, expected {expected})")]
    HashMismatch { path: String, found: String, expected: String },
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },
    #[error(transparent)]
    Core(#[from] mirp_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

pub(crate) trait IoContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| HarnessError::Io { context: what(), source })
    }
}

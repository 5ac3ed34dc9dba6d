use std::io;

/// Errors raised by the simulator, the theory routines and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// A mathematical routine was called outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// An experiment or model configuration is invalid.
    #[error("config error: {0}")]
    Config(String),
    /// A run could not obtain the memory it needs.
    #[error("resource exhausted: {0}")]
    Resource(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Error taxonomy shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments failed.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request exceeds a configured memory or time budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// A numeric parameter would make the result unreliable.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    /// A lookup fell outside a precomputed table; rebuild with a larger range.
    #[error("table range error: {0}")]
    TableRange(String),
    /// Malformed or inconsistent experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

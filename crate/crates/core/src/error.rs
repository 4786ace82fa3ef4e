use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a precondition or invariant check.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// CSV schema or parse failure with file and line context.
    #[error("{path}:{line}: {msg}")]
    Csv { path: String, line: u64, msg: String },

    /// Numerical failure: singular design, failed decomposition, divergence.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

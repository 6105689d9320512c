use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// The variants double as the CLI's exit-code classes: usage problems,
/// malformed input data, and internal or numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad arguments or violated preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed or inconsistent input data (corpus, records, plan).
    #[error("data error: {0}")]
    Data(String),

    /// Violated structural invariant (IOB2, span ordering, lengths).
    #[error("structural error: {0}")]
    Structural(String),

    /// A style template that cannot be parsed or applied.
    #[error("template error: {0}")]
    Template(String),

    /// Non-finite values during training or inference.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

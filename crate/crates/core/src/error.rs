use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: unknown manifold tag, nonpositive radius,
    /// probability content outside (0, 1), missing bounding box, or a
    /// malformed experiment description.
    #[error("configuration error: {0}")]
    Config(String),
    /// Invalid data handed to an operation: manifold mismatch, non-unit
    /// sphere vector, non-finite coordinate, or an empty set where a
    /// non-empty one is required.
    #[error("domain error: {0}")]
    Domain(String),
    /// Failure while reading or interpreting an external data file.
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn ingestion(msg: impl Into<String>) -> Self {
        Error::Ingestion(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("invalid shift tuple: {0}")]
    InvalidTuple(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    /// The requested computation exceeds a configured work or enumeration limit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("empty construction: {0}")]
    EmptyConstruction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

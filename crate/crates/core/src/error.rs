use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("exhaustive cap exceeded: n = {n} > cap {cap}; use sampled mode instead")]
    CapExceeded { n: usize, cap: usize },
    #[error("decode integrity: {0}")]
    DecodeIntegrity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset: {0}")]
    Format(String),
    #[error("inconsistent data: {0}")]
    Mismatch(String),
}

impl From<serde_json::Error> for BoundaryError {
    fn from(e: serde_json::Error) -> Self {
        BoundaryError::Format(e.to_string())
    }
}

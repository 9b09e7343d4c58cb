use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error(transparent)]
    Boundary(#[from] dirac_boundary::BoundaryError),
    #[error("domain of dependence: {0}")]
    Domain(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("ambiguous rank in degree {degree}: {reason}; eigenvalue ladder {ladder:?}")]
    AmbiguousRank { degree: usize, reason: String, ladder: Vec<f64> },
    #[error("counts did not stabilize: {0}")]
    NoStabilization(String),
    #[error("inconsistent: {0}")]
    Inconsistent(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Core(#[from] dirac_core::CoreError),
    #[error(transparent)]
    Recovery(#[from] dirac_recovery::RecoveryError),
    #[error(transparent)]
    Boundary(#[from] dirac_boundary::BoundaryError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Body of `errors.json`.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Scenario(_) => "scenario",
            CliError::Core(_) => "core",
            CliError::Recovery(_) => "recovery",
            CliError::Boundary(_) => "boundary",
            CliError::Io(_) => "io",
            CliError::Json(_) => "json",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport { kind: self.kind(), message: self.to_string() }
    }
}

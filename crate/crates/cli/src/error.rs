use rld_core::analysis::AnalysisError;
use rld_core::chaoskit::ChaosError;
use rld_core::IntegrationError;
use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidConfig(_) | IntegrationError::Model(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Integration(inner) => inner.into(),
            AnalysisError::InsufficientSpan { .. }
            | AnalysisError::GridNotAligned { .. }
            | AnalysisError::TooFewPoints { .. }
            | AnalysisError::InvalidSweep(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ChaosError> for CliError {
    fn from(e: ChaosError) -> Self {
        match e {
            ChaosError::NoNeighbor => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

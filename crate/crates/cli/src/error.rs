use robust_esn::esn::{EsnError, ModelFileError};
use robust_esn::lmi::{SolutionFileError, SynthesisError};
use robust_esn::polymodel::ModelError;
use robust_esn::sim::SimError;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Other(format!("{}: {e}", path.display()))
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        let msg = e.to_string();
        match e {
            SynthesisError::InvalidProblem(_) | SynthesisError::Model(_) => CliError::Validation(msg),
            SynthesisError::Infeasible { .. } | SynthesisError::AllInfeasible { .. } => CliError::Infeasible(msg),
            SynthesisError::BackendFailure { .. } | SynthesisError::Verification { .. } => CliError::Numerical(msg),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EsnError> for CliError {
    fn from(e: EsnError) -> Self {
        match e {
            EsnError::SingularNormalMatrix => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Divergence { .. } | SimError::Diverged { .. } => CliError::Numerical(e.to_string()),
            SimError::Csv(_) => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SolutionFileError> for CliError {
    fn from(e: SolutionFileError) -> Self {
        match e {
            SolutionFileError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        match e {
            ModelFileError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

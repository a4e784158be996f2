use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("incomplete run directory: {0}")]
    IncompleteRun(String),

    #[error("acceptance threshold not met: {0}")]
    Threshold(String),

    #[error(transparent)]
    Core(#[from] tomonet::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for missing
    /// inputs, 4 for failed thresholds, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(tomonet::Error::InvalidConfig(_))
            | CliError::Core(tomonet::Error::OutOfRange(_))
            | CliError::Core(tomonet::Error::UnsupportedQubits(_)) => 2,
            CliError::MissingArtifact(_) | CliError::IncompleteRun(_) => 3,
            CliError::Threshold(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Fails with [`CliError::MissingArtifact`] unless `path` exists.
pub fn require(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::MissingArtifact(path))
    }
}

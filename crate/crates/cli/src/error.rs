use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] specgap::Error),
    #[error("serialising report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(specgap::Error::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            _ => EXIT_CONFIG,
        }
    }
}

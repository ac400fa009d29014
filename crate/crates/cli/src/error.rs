use std::process::ExitCode;

use thiserror::Error;

/// Failures of a run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed configuration or usage; exit code 3.
    #[error("{0}")]
    Config(String),
    /// The inputs were well formed but the computation failed; exit code 2.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(3),
            CliError::Domain(_) => ExitCode::from(2),
        }
    }
}

impl From<tropifs::Error> for CliError {
    fn from(e: tropifs::Error) -> Self {
        use tropifs::Error as E;
        match e {
            E::Config(_) | E::Dimension(_) | E::Index { .. } | E::EmptySet | E::EmptySupport => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("json error: {e}"))
    }
}

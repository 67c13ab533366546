use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scenario `{scenario}`: {source}")]
    Model {
        scenario: String,
        #[source]
        source: qh_core::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid { path: path.into(), message: message.into() }
    }

    pub fn model(scenario: &str, source: qh_core::Error) -> Self {
        CliError::Model { scenario: scenario.to_string(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 3 for a numerical breakdown, 2 for everything else that stops a run before a verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model { source, .. } if source.is_numerical_breakdown() => 3,
            _ => 2,
        }
    }
}

//! Experiment harness behind the `haarqmc` command-line tool.

use std::path::Path;

use thiserror::Error;

pub mod config;
pub mod experiment;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] haarqmc::Error),
}

impl CliError {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        CliError::Config { line, message: message.into() }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    /// Process exit code: 2 for invalid input, 3 when a numeric budget is
    /// exhausted, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Core(haarqmc::Error::Io(_)) => 1,
            CliError::Core(haarqmc::Error::Budget(_)) => 3,
            _ => 2,
        }
    }
}

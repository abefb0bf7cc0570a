//! Experiment driver: configuration files, run directories and the
//! acceptance suites behind the `mvtorus` binary.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod manifest;

use std::io;

/// Failure of a subcommand, mapped onto the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] mvtorus::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    /// A check ran and did not pass.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for failed checks, 2 for usage and I/O errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

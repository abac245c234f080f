//! Library side of the `chaplygin` command-line tool.

pub mod commands;
pub mod config;
pub mod table;

pub use config::{Model, RawConfig, RunConfig};
pub use table::Table;

use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("integration failed: {0}")]
    Integration(#[from] chaplygin::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config(_) => ExitCode::from(2),
            Self::Integration(_) | Self::Runtime(_) | Self::Io(_) => ExitCode::from(3),
        }
    }
}

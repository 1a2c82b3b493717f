//! Command-line front end: scan, mine, fit and report phases driven by a
//! TOML run configuration.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod svg;

use std::path::Path;

use reuselens_core::{HistoryError, ScanError};
use reuselens_stats::StatsError;
use thiserror::Error;

pub use commands::{execute, Command, Outcome, SynthKind};
pub use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("parse: {0}")]
    Parse(#[from] ScanError),

    #[error(transparent)]
    History(#[from] HistoryError),

    #[error("{context}: {source}")]
    Stats { context: String, source: StatsError },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Missing(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

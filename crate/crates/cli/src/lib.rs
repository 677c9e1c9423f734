//! Batch driver: loads experiment configs, runs them and writes JSON reports
//! with CSV sidecars.

use std::path::PathBuf;

pub mod config;
pub mod run;

pub use config::{Command, ExperimentConfig};
pub use run::{emit_fixtures, run, Check, RunReport, REPORT_FILE};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: schema error: {detail}")]
    Schema { path: PathBuf, detail: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Core(#[from] frametk::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

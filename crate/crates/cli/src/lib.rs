//! Experiment runner for the `lrk` solvers: reads a JSON config, builds the
//! test problem, runs the requested solvers and writes CSV metrics, spectra,
//! reconstructions and a `summary.json`.

pub mod config;
pub mod runner;

pub use config::{ExperimentConfig, SolverEntry, SolverKind};
pub use runner::{run, RunOptions, RunSummary, SolverSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or inconsistent configuration, detected before solving.
    #[error("config error: {0}")]
    Config(String),
    #[error("solver `{label}` failed: {reason}")]
    Solver { label: String, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver { .. } | CliError::Io { .. } => 2,
        }
    }
}

//! Command-line front end: JSON-configured sweeps writing `<prefix>.csv`,
//! `<prefix>.gp` and `<prefix>.meta.json`.

pub mod config;
mod plot;
pub mod run;

use std::path::PathBuf;

pub use config::{Mode, SweepConfig};
pub use run::{capmat_text, run, run_config, validate, RunOptions, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] crate::error::Error),
    #[error("output: {0}")]
    Output(String),
}

/// Exit status for a failed command.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        }
    }
}

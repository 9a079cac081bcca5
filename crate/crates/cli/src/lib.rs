//! Sweep harness over spins, representation pairs and amplification levels.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{Experiment, RunConfig, SideLabel};
pub use sweep::{run, Record, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] qbridge::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Exit code for a run where some cells failed.
pub const EXIT_PARTIAL: i32 = 3;

//! Command-line surface for kgsim: config-driven runs and small utilities.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use commands::{
    cmd_batch, cmd_free_decay, cmd_gapcheck, cmd_multifreq, cmd_simulate, cmd_solitary, cmd_spectrum, FreeDecayArgs,
    MultiFreqArgs, SimulateOutcome,
};
pub use config::{load, parse, prepare, Prepared, RunConfig};
pub use output::RunManifest;

/// Exit codes.
pub mod exit {
    pub const COMPLETED: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const BLOWN_UP: i32 = 3;
    pub const CONTAMINATED: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("refusing to overwrite {0}: it holds a manifest for a different config (use --force)")]
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) | CliError::Refused(_) => exit::IO,
        }
    }
}

impl From<kgsim::Error> for CliError {
    fn from(e: kgsim::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

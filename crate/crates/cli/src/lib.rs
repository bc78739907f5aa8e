//! Workflows behind the `ipt-tank` command: solve, verify, sweep and the
//! equivalence check, each reading a JSON project configuration and writing
//! JSON or CSV results.
//!
//! Exit codes: 0 on success, 1 when the run completed but the design failed
//! (no solution, a failed check, an equivalence discrepancy), 2 for invalid
//! input.

use std::fmt;

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_equiv, cmd_solve, cmd_sweep, cmd_verify, EquivSource, Outcome, SweepArgs};
pub use config::{DesignFile, ProjectConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Malformed or out-of-range input. Exit code 2.
    Invalid(String),
    /// The run could not finish, e.g. an output file could not be written.
    /// Exit code 1.
    Failed(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 2,
            Self::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Invalid(m) | Self::Failed(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

//! Command-line front end: configuration, commands, verification suite and
//! file writers.

pub mod commands;
pub mod config;
pub mod export;
pub mod report;

pub use commands::{execute, run_command, Command, Outcome, Overrides, RunError};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "S4GAUSS_THREADS";

/// Worker count requested through [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
    }
}

//! Library side of the `ndf` binary: configuration, report rendering and
//! the subcommands themselves.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// Non-design, non-convergence, failed check.
    pub const NEGATIVE: u8 = 1;
    /// Bad usage, unreadable or malformed input.
    pub const USAGE: u8 = 2;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ndf_core::Error> for CliError {
    fn from(e: ndf_core::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

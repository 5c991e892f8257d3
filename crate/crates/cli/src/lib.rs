//! IO, file formats, and the command layer for the dialog workbench. The
//! algorithmic core lives in `dialogforge-core`; this crate owns everything
//! that touches the filesystem or a terminal.

pub mod chat;
pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

use std::fmt;

/// Command-level failure, split by exit code: usage errors exit 2, runtime
/// errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

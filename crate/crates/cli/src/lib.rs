//! Command-line front end for `vge-core`: file formats, the saddle cache,
//! threaded drivers and the `vge` subcommands.

pub mod args;
pub mod cache;
pub mod commands;
pub mod drivers;
pub mod formats;

use std::fmt;

pub use args::Cli;
pub use commands::run;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Unreadable or malformed input file.
    Input(String),
    Core(vge_core::Error),
    Io(String),
}

impl CliError {
    /// 1 usage or other failure, 2 bad input, 3 hypothesis violation,
    /// 4 resource cap.
    pub fn exit_code(&self) -> i32 {
        use vge_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidGraph(_) | E::InvalidOrigami(_) => 2,
                E::EntropyDiverges
                | E::NoSingularities
                | E::Disconnected { .. }
                | E::TailCondition { .. }
                | E::BelowAbscissa { .. }
                | E::NotConvergent
                | E::NotSingular(_) => 3,
                E::ResourceLimit { .. } => 4,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Input(m) => write!(f, "input: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<vge_core::Error> for CliError {
    fn from(e: vge_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

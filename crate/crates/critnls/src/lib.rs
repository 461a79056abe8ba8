//! Command-line front end for `critnls-core`: configuration, result files,
//! charts, and the subcommands behind the `critnls` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod plots;

pub use config::RunConfig;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NoInput(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerics(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::NoInput(_) => EXIT_NO_INPUT,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerics(_) => EXIT_SOFTWARE,
        }
    }
}

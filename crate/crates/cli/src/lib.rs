//! Command-line front end: file formats and subcommands.

pub mod commands;
pub mod format;

pub use commands::{run, Cli, CliError};

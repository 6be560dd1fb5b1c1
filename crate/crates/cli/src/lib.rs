//! Experiment driver: configuration, subcommands and output layout for the
//! `reqroi` binary.

pub mod commands;
pub mod config;
mod error;

pub use error::{CliError, ErrorKind};

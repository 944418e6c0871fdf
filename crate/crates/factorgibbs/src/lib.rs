//! Files, threads and the command-line front end for `factorgibbs-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod parallel;

pub use error::{CliError, CliResult};

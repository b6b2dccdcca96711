//! File formats, configs, benchmarks and command implementations behind the
//! `maskstl` binary.

pub mod bench;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use error::{CliError, CliResult};

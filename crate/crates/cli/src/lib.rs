//! Batch front end for `incivility-core`.
//!
//! Each subcommand is a plain function over a [`RunConfig`] so tests can
//! drive the same code paths as the binary.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

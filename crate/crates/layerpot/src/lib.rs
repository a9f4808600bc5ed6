//! Configuration files, convergence reports, matrix dumps and the
//! `layerpot` command-line tool on top of [`layerpot_core`].

pub mod commands;
pub mod config;
pub mod files;
pub mod report;

pub use commands::{run_study, CliError};
pub use config::{ConfigError, RunConfig};

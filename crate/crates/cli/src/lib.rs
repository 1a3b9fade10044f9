//! Command-line front end: configuration parsing, presets and subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod presets;
pub mod units;

pub use commands::run;
pub use error::CliError;

//! Command-line front end for the relay capacity library.

pub mod app;
pub mod config;

pub use app::{execute, resolve_config, run, AppError, Cli, Command, Preset};
pub use config::{parse_config, ConfigError, RunConfig};

#[cfg(test)]
mod tests;

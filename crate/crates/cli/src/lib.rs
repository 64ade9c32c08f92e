//! Command-line front end: run configuration, commands and result files.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub use commands::{execute, Artifact};
pub use config::{load_config, load_with_overrides, Command, Overrides, RunConfig};
pub use output::write_outputs;

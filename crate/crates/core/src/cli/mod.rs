//! Configuration, reports and subcommands of the `banach-zeros` binary.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

pub use commands::{run, Command, RunOptions};
pub use config::{LoadedConfig, RunConfig};
pub use report::Report;

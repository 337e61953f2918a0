//! Batch runner for the hiertree verification suites.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::Report;
pub use config::{ConfigError, ExperimentConfig, Format};
pub use table::Table;

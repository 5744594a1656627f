//! Experiment runner on top of `contactlab-core`.
//!
//! A run is one TOML (or JSON) config naming a command and its parameters. The
//! outputs land in one directory: `report.json`, one CSV per table, field files for
//! the mean-field commands, and `timing.json`.

pub mod config;
pub mod field_io;
pub mod report;
pub mod run;

pub use config::{CommandKind, ConfigError, ExperimentConfig};
pub use run::{run_experiment, RunError};

//! Experiment runner behind the `wden` binary: a flat key-value config
//! format with command-line overrides, a catalog of verification
//! experiments, and deterministic machine-readable results.

pub mod config;
pub mod experiments;

pub use config::{Cli, Command, ConfigError, ExperimentConfig};
pub use experiments::{catalog, run_experiment, CatalogEntry, CheckRow, ExperimentResult};

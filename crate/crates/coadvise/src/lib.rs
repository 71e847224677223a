//! Experiment runner for two-player contextual bandit simulations.
//!
//! Wraps the `coadvise-core` engine with file formats, a config loader, a
//! parallel batch runner, and the commands behind the `coadvise` binary.

pub mod batch;
pub mod catalog;
pub mod commands;
pub mod config;
mod error;
pub mod sinks;
pub mod spec;

pub use coadvise_core as core;
pub use config::{parse_config, parse_config_str, ExperimentConfig};
pub use error::ConfigError;
pub use spec::InstanceSpec;

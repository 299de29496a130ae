//! Library surface of the experiment driver, exposed for integration tests.

pub mod config;
pub mod engine;

pub use config::{validate_config, ConfigError, Experiment, ExperimentConfig};
pub use engine::{run, RunError, RunOptions, RunSummary};

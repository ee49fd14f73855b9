//! Experiment runner for the hybrid feedback simulator: config parsing,
//! parameter sweeps with CSV output, and the validation suite driver.

pub mod config;
pub mod error;
pub mod experiment;
pub mod validation;

pub use config::{load_config, parse_config, Experiment, ExperimentConfig};
pub use error::{CliError, ConfigError};
pub use experiment::{csv_body, run_experiment, RunOutput};
pub use validation::run_validation;

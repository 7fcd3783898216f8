//! Experiment driver for the `fbm-lift-core` numerics: configuration,
//! experiments with pass/fail checks, and CSV reports.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{run_experiment, Kind};
pub use fbm_lift_core::scaling::{fit_power_law, PowerLawFit};
pub use report::Report;

//! Configuration, execution and reporting for trbeam experiments.

pub mod cache;
pub mod config;
pub mod error;
pub mod plot;
pub mod presets;
pub mod records;
pub mod runner;
pub mod selftest;
pub mod summary;

pub use config::{ConfigFile, ExperimentConfig};
pub use error::{HarnessError, Result};

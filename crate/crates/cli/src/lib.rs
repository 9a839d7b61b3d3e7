//! Experiment runner for the `jdd` crate: sweep configuration, drivers and
//! CSV output.

pub mod config;
pub mod error;
pub mod output;
pub mod sweeps;

pub use config::{Scheme, Sweep, SweepConfig};
pub use error::CliError;

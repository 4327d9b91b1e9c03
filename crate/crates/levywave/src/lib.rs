//! Config-driven runner for the Lévy-noise wave equation simulator.
//!
//! Parallelism lives here: moment blocks, probe replicates and noise-test
//! replicates are spread over a rayon pool and reduced in index order, so
//! artifacts do not depend on the thread count.

pub mod cli;
pub mod config;
pub mod emit;
pub mod error;
pub mod experiment;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{Experiment, RunOutput, VERSION};

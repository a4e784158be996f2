//! Experiment harness: dataset generation, training grids, fidelity tables,
//! reduced-data sweeps, fixture reports and a consolidated run report.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod report;

pub use error::{CliError, Result};
pub use experiment::{ExperimentConfig, RunLayout, TaskKind};

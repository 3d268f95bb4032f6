//! Runs configured experiments and writes their reports.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;
pub mod verify;

pub use config::ExperimentConfig;
pub use experiments::{anchor, flatness_probe, run_experiment, Mode};
pub use report::{Cell, Report, Table, Verdict};
pub use stats::spearman;

//! Batch front end for the aggregate-interference toolkit: experiment
//! configuration, presets, and the `analyze` / `sample` / `des` / `compare`
//! pipelines.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use commands::{cmd_analyze, cmd_compare, cmd_des, cmd_sample, RunSummary};
pub use config::{ExperimentConfig, Layout, SweepPoint};
pub use error::{CliError, CliResult};

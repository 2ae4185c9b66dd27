//! Configuration, orchestration and report writing for the `randsum` tool.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Outcome, Subcommand};
pub use config::{ExperimentConfig, GridConfig, Overrides};
pub use error::CliError;

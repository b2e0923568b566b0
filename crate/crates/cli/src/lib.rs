//! Experiment runner: config parsing, subcommand dispatch and reports.

// `!(x > 0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod examples;
pub mod report;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Format, RunKind};
pub use error::{CliError, Result};
pub use report::{Report, Table, Verdict};

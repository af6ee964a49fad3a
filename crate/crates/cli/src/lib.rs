//! Configuration, pipeline stages and subcommands of the `robust-esn` tool.

// `!(a > b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;

pub use commands::Overrides;
pub use config::{RunConfig, ThetaSynthesis};
pub use error::CliError;

#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Benchmark harness: configuration, problem setup and the CLI subcommands.

pub mod commands;
pub mod config;
pub mod problem;

pub use config::{BenchConfig, ConfigError};
pub use problem::Benchmark;

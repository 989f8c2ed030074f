//! Experiment runner for `commsir`: configuration files, replicated
//! simulation, artifact output and comparison against the limit theory.

pub mod commands;
pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;

pub use config::{Engine, ExperimentConfig, Overrides, ParamsConfig};
pub use error::{CliError, Result};

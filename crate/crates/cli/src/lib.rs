//! Experiment orchestration on top of `faulty_oracle_core`: sweeps of the
//! threshold runtime over N, bound verification, noise unraveling and
//! result files.

pub mod config;
pub mod error;
pub mod output;
pub mod simulate;
pub mod sweep;
pub mod unravel;

pub use error::{exit, CliError, Result};

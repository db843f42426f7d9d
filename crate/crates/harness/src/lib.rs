//! Experiment configuration, reports and acceptance checks for `simapprox`.

pub mod config;
mod error;
pub mod nodes;
pub mod output;
pub mod report;
pub mod run;
pub mod verify;

pub use error::{HarnessError, Result};

//! Experiment orchestration for the radial blow-up laboratory: plain-text
//! configuration, deterministic plan execution with CSV/JSON artifacts, and
//! the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod plan;
pub mod report;

pub use crate::config::{parse_config, ConfigError, PlanSpec};
pub use crate::plan::{run_plan, PlanOutcome};

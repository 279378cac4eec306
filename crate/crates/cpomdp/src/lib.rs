//! Experiment harness for the constrained POMDP planners in `cpomdp-core`.
//!
//! This crate runs receding-horizon episodes with an external particle
//! filter, aggregates returns, drives the planner comparison, the Pareto
//! sweep over scalarization weights and the cost-propagation ablation, and
//! writes CSV, JSON and plot-data outputs. The `cpomdp` binary wraps it.

pub mod config;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod output;
pub mod planners;

pub use config::{Overrides, ProblemId, RolloutId, RunConfig};
pub use error::HarnessError;
pub use planners::PlannerId;

//! Online planning for constrained POMDPs with continuous state, action and
//! observation spaces.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the model
//! abstraction, particle beliefs, the three constrained tree-search variants
//! (observation widening with weighted particle insertion, particle-filter
//! belief trees, and plain double progressive widening), the dual-ascent
//! planning loop with its ν-close stochastic policy, and the benchmark
//! problems. Episode execution, file formats and the command line live in the
//! `cpomdp` companion crate.
//!
//! All randomness flows through caller-supplied [`rand::Rng`] values, so a
//! seeded generator makes every planner call reproducible bit for bit.

#![no_std]

extern crate alloc;

pub mod belief;
pub mod dual;
pub mod error;
pub mod lp;
pub mod model;
pub mod planner;
pub mod problems;
pub mod search;
pub mod tree;

pub use belief::{ParticleBelief, PfOutcome};
pub use dual::{LambdaState, StepSchedule, StochasticActionPolicy};
pub use error::CoreError;
pub use model::{ActionSpace, Costs, Cpomdp, CpomdpSpec, GenerativeOutcome, Returns};
pub use planner::{plan, PlanDiagnostics, PlanOutcome, PlannerConfig, RootActionStats};
pub use search::{SearchConfig, Variant};

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;

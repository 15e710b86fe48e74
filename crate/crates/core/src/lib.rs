//! Time-constrained machine teaching: teachers that pick which labeled
//! examples a black-box learner trains on so the best model emerges within
//! a time budget.

// `!(x >= y)` checks are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod domain;
pub mod harness;
pub mod learners;
pub mod model;
pub mod rng;
pub mod stats;
pub mod teachers;
pub mod theory;
pub mod trace;

pub use clock::{ClockMode, CostClock, CostModel, CostShape, TimeBudget};
pub use domain::{Example, ExamplePool, PoolError, SyntheticDistribution, SyntheticKind};
pub use model::{IncrementalLearner, Learner, LearnerError, Model, SharedModel};
pub use stats::AccuracyEstimate;
pub use trace::{RoundRecord, StopReason, TeacherRun};

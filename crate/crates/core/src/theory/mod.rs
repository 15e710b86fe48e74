//! Executable checks of the base teacher's guarantees.

use thiserror::Error;

use crate::teachers::TeacherError;

pub mod bad_example;
pub mod fallback;
pub mod finite;
pub mod threshold;

pub use bad_example::{bad_example_exact_errors, bad_example_instance, run_bad_example, BadExampleReport, HBAR};
pub use fallback::{
    agnostic_slack, agnostic_slack_exact, time_multiplier, time_multiplier_exact, verify_fallback_bounds,
    FallbackConfig, FallbackReport,
};
pub use finite::FiniteInstance;
pub use threshold::{
    run_shrinkage, run_threshold_experiment, shape_check, ShapeCheck, ShrinkReport, ThresholdConfig, ThresholdInstance,
    ThresholdReport, UncertaintyInterval,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("eps {eps} is below the resolvable minimum {min}")]
    EpsTooSmall { eps: f64, min: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
}

//! Teachers: algorithms that decide which examples a black-box learner sees
//! and which of its models to return when time runs out.

use thiserror::Error;

use crate::clock::{CostClock, TimeBudget};
use crate::domain::{Example, PoolError};
use crate::model::{Learner, LearnerError, Model, SharedModel};
use crate::rng::StreamRng;

pub mod double;
pub mod osct;
pub mod sgd;
pub mod tbatch;
pub mod tct;
pub mod tct_al;
pub mod tctbase;

pub use double::run_double;
pub use osct::{run_osct, NGuessRule, OsctParams};
pub use sgd::run_sgd_stream;
pub use tbatch::run_tbatch;
pub use tct::{a2_request, run_dynamic_tct, run_tct, AlphaRule, TctParams};
pub use tct_al::{run_tct_al, top_two_gap};
pub use tctbase::{run_tctbase, CountRounding, TctBaseOutcome, TctBaseParams, TeachingInstance, WrongDraw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeacherError {
    #[error("pool holds {available} examples, teacher needs at least {needed}")]
    NotEnoughExamples { needed: usize, available: usize },
    #[error("learner `{0}` is not supported by this teacher")]
    UnsupportedLearner(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// Scores a model on held-out data.
pub type Probe<'a> = &'a (dyn Fn(&dyn Model) -> f64 + Sync);

/// Everything a teacher run needs besides the learner and the data.
pub struct RunEnv<'a> {
    pub clock: CostClock,
    pub budget: TimeBudget,
    /// Teacher-side randomness (subset choices, OSCT draws).
    pub rng: StreamRng,
    /// Evaluated on every new model with the clock paused.
    pub probe: Option<Probe<'a>>,
}

impl<'a> RunEnv<'a> {
    pub fn new(clock: CostClock, budget: TimeBudget, rng: StreamRng) -> Self {
        Self { clock, budget, rng, probe: None }
    }

    pub fn with_probe(mut self, probe: Probe<'a>) -> Self {
        self.probe = Some(probe);
        self
    }

    pub fn limit(&self) -> f64 {
        self.budget.limit()
    }

    pub fn elapsed(&self) -> f64 {
        self.clock.elapsed()
    }

    pub fn within_budget(&self) -> bool {
        self.clock.elapsed() <= self.budget.limit()
    }

    /// Test accuracy of `model`; the clock does not advance.
    pub fn evaluate(&mut self, model: &dyn Model) -> Option<f64> {
        let probe = self.probe?;
        Some(self.clock.suspended(|| probe(model)))
    }

    /// Trains `learner`, charging its simulated cost (wall mode measures the
    /// call itself).
    pub fn train(
        &mut self,
        learner: &dyn Learner,
        data: &[&Example],
        n_classes: usize,
    ) -> Result<SharedModel, LearnerError> {
        let model = learner.train(data, n_classes)?;
        self.clock.charge_training(data.len(), learner.cost_model());
        Ok(model)
    }
}

/// `floor(x)` for counts computed in floating point; absorbs representation
/// error so that e.g. `0.2 * 50` floors to 10.
pub fn floor_count(x: f64) -> usize {
    if !(x > 0.0) {
        return 0;
    }
    (x * (1.0 + 1e-12) + 1e-9).floor() as usize
}

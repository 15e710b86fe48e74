//! The black-box learner contract.

use std::fmt::Debug;
use std::sync::Arc;

use thiserror::Error;

use crate::clock::{CostClock, CostModel};
use crate::domain::Example;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("expected {expected} features, got {found}")]
    ShapeError { expected: usize, found: usize },
    #[error("cannot train on an empty set")]
    EmptyTrainingSet,
    #[error("learner `{0}` does not produce class probabilities")]
    NoProbabilities(String),
}

/// A trained predictor.
pub trait Model: Send + Sync + Debug {
    fn predict(&self, features: &[f64]) -> usize;

    /// Class probabilities, when the model has them. Must sum to 1 and
    /// have its argmax at [`Model::predict`].
    fn predict_proba(&self, _features: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn supports_probabilities(&self) -> bool {
        false
    }
}

pub type SharedModel = Arc<dyn Model>;

/// An opaque training procedure. Training must be deterministic for a given
/// learner configuration and input order.
pub trait Learner: Send + Sync {
    fn name(&self) -> &str;

    /// Cost parameters the simulated clock charges for this learner.
    fn cost_model(&self) -> CostModel;

    fn supports_probabilities(&self) -> bool {
        false
    }

    fn train(&self, data: &[&Example], n_classes: usize) -> Result<SharedModel, LearnerError>;
}

/// A learner that can take one mini-batch step at a time.
pub trait IncrementalLearner: Send + Sync {
    type State: Model + Clone + 'static;

    fn name(&self) -> &str;

    /// Simulated cost of one update on `batch` examples.
    fn cost_model(&self) -> CostModel;

    fn initial_state(&self, n_features: usize, n_classes: usize) -> Self::State;

    fn partial_update(&self, state: &mut Self::State, batch: &[&Example]) -> Result<(), LearnerError>;
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn accuracy(model: &dyn Model, examples: &[&Example]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let correct = examples.iter().filter(|e| model.predict(&e.features) == e.label).count();
    correct as f64 / examples.len() as f64
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot classify an empty batch")]
pub struct EmptyBatch;

/// Outcome of scoring a batch: which items the model got wrong and right,
/// each in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<I> {
    pub accuracy: f64,
    pub wrong: Vec<I>,
    pub correct: Vec<I>,
}

/// Scores `items` with `model`, charging one classification per item.
pub fn classify_and_split<'a, I: Copy>(
    model: &dyn Model,
    items: &[I],
    lookup: impl Fn(I) -> &'a Example,
    clock: &mut CostClock,
) -> Result<Split<I>, EmptyBatch> {
    if items.is_empty() {
        return Err(EmptyBatch);
    }
    clock.charge_classification(items.len());
    let mut wrong = Vec::new();
    let mut correct = Vec::new();
    for &item in items {
        let e = lookup(item);
        if model.predict(&e.features) == e.label {
            correct.push(item);
        } else {
            wrong.push(item);
        }
    }
    let accuracy = correct.len() as f64 / items.len() as f64;
    Ok(Split { accuracy, wrong, correct })
}

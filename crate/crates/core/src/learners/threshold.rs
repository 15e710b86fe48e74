//! Empirical risk minimization over 1-D threshold classifiers.

use std::sync::Arc;

use crate::clock::CostModel;
use crate::domain::Example;
use crate::model::{Learner, LearnerError, Model, SharedModel};

/// `h(x) = +1` if `x >= v`, else `-1`. `v` may be `±inf` for constant
/// classifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdHypothesis {
    pub v: f64,
}

impl ThresholdHypothesis {
    pub fn classify(&self, x: f64) -> i8 {
        if x >= self.v {
            1
        } else {
            -1
        }
    }

    pub fn sample_errors(&self, train: &[(f64, i8)]) -> usize {
        train.iter().filter(|(x, y)| self.classify(*x) != *y).count()
    }
}

impl Model for ThresholdHypothesis {
    fn predict(&self, features: &[f64]) -> usize {
        usize::from(self.classify(features[0]) == 1)
    }
}

/// Returns a threshold with the fewest sample mistakes.
///
/// Among optimal cuts the leftmost wins, and the threshold sits at the
/// midpoint of the gap between the two neighbouring sample values. In the
/// realizable case this is the midpoint of (largest negative, smallest
/// positive]. Constant labels give `-inf` (all positive) or `+inf` (all
/// negative).
pub fn threshold_erm(train: &[(f64, i8)]) -> ThresholdHypothesis {
    let mut sorted: Vec<(f64, i8)> = train.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let negatives_total = sorted.iter().filter(|(_, y)| *y != 1).count();

    // cut j: the first j sorted points are predicted -1
    let mut best_cut = 0usize;
    let mut best_err = negatives_total;
    let mut pos_prefix = 0usize;
    let mut neg_prefix = 0usize;
    for j in 1..=sorted.len() {
        if sorted[j - 1].1 == 1 {
            pos_prefix += 1;
        } else {
            neg_prefix += 1;
        }
        let boundary = j == sorted.len() || sorted[j - 1].0 < sorted[j].0;
        if !boundary {
            continue;
        }
        let err = pos_prefix + (negatives_total - neg_prefix);
        if err < best_err {
            best_err = err;
            best_cut = j;
        }
    }

    let v = if best_cut == 0 {
        f64::NEG_INFINITY
    } else if best_cut == sorted.len() {
        f64::INFINITY
    } else {
        let lo = sorted[best_cut - 1].0;
        let hi = sorted[best_cut].0;
        let mid = lo + (hi - lo) / 2.0;
        if mid > lo {
            mid
        } else {
            hi
        }
    };
    ThresholdHypothesis { v }
}

/// Black-box wrapper: 1-D examples, class 1 is `+1`, class 0 is `-1`.
#[derive(Debug, Clone)]
pub struct ThresholdLearner {
    pub cost: CostModel,
}

impl ThresholdLearner {
    pub fn new(cost: CostModel) -> Self {
        Self { cost }
    }
}

impl Learner for ThresholdLearner {
    fn name(&self) -> &str {
        "threshold"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn train(&self, data: &[&Example], _n_classes: usize) -> Result<SharedModel, LearnerError> {
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let mut pairs = Vec::with_capacity(data.len());
        for e in data {
            if e.features.len() != 1 {
                return Err(LearnerError::ShapeError { expected: 1, found: e.features.len() });
            }
            pairs.push((e.features[0], if e.label == 1 { 1 } else { -1 }));
        }
        Ok(Arc::new(threshold_erm(&pairs)))
    }
}

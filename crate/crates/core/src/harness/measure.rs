//! Full-training time `t_DL`, the unit of every budget and curve.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::clock::ClockMode;
use crate::domain::Example;
use crate::model::Learner;

pub const WALL_REPETITIONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullTrainingTime {
    pub mode: ClockMode,
    pub mean: f64,
    /// Every measurement; a single exact value in simulated mode.
    pub runs: Vec<f64>,
    /// Wall mode: whether `mean` reached the validity threshold.
    pub valid: bool,
}

impl FullTrainingTime {
    pub fn simulated(cost: f64) -> Self {
        Self { mode: ClockMode::Simulated, mean: cost, runs: vec![cost], valid: true }
    }

    /// Mean of wall measurements, flagged invalid below `threshold`.
    pub fn from_wall_runs(runs: Vec<f64>, threshold: f64) -> Self {
        let mean = runs.iter().sum::<f64>() / runs.len().max(1) as f64;
        Self { mode: ClockMode::Wall, mean, valid: mean >= threshold, runs }
    }
}

pub fn measure_full_training_time(
    learner: &dyn Learner,
    train: &[Example],
    n_classes: usize,
    mode: ClockMode,
    validity_threshold: f64,
) -> Result<FullTrainingTime, HarnessError> {
    match mode {
        ClockMode::Simulated => Ok(FullTrainingTime::simulated(learner.cost_model().train_cost(train.len()))),
        ClockMode::Wall => {
            let refs: Vec<&Example> = train.iter().collect();
            let mut runs = Vec::with_capacity(WALL_REPETITIONS);
            for _ in 0..WALL_REPETITIONS {
                let start = Instant::now();
                learner.train(&refs, n_classes)?;
                runs.push(start.elapsed().as_secs_f64());
            }
            Ok(FullTrainingTime::from_wall_runs(runs, validity_threshold))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{CostModel, CostShape};
    use crate::learners::ThresholdLearner;

    #[test]
    fn simulated_is_exact() {
        let l = ThresholdLearner::new(CostModel::new(2, CostShape::Constant));
        let train: Vec<Example> = (0..100).map(|i| Example::new(vec![i as f64], usize::from(i >= 50))).collect();
        let t = measure_full_training_time(&l, &train, 2, ClockMode::Simulated, 10.0).unwrap();
        assert_eq!(t.mean, 10_000.0);
        assert_eq!(t.runs, vec![10_000.0]);
        assert!(t.valid);
    }

    #[test]
    fn wall_keeps_four_runs() {
        let l = ThresholdLearner::new(CostModel::default());
        let train: Vec<Example> = (0..20).map(|i| Example::new(vec![i as f64], i % 2)).collect();
        let t = measure_full_training_time(&l, &train, 2, ClockMode::Wall, 10.0).unwrap();
        assert_eq!(t.runs.len(), 4);
        assert!(!t.valid);
    }

    #[test]
    fn validity_threshold() {
        assert!(!FullTrainingTime::from_wall_runs(vec![9.5; 4], 10.0).valid);
        let t = FullTrainingTime::from_wall_runs(vec![9.0, 10.0, 11.0, 12.0], 10.0);
        assert_eq!(t.mean, 10.5);
        assert!(t.valid);
    }
}

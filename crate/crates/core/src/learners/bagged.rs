//! Small bootstrap-aggregated tree ensemble.

use std::sync::Arc;

use rand::Rng;

use crate::clock::{CostModel, CostShape};
use crate::domain::Example;
use crate::model::{argmax, Learner, LearnerError, Model, SharedModel};
use crate::rng::trial_stream;

use super::tree::{DecisionTree, DecisionTreeModel};

#[derive(Debug, Clone)]
pub struct BaggedTreesModel {
    trees: Vec<DecisionTreeModel>,
    n_classes: usize,
}

impl BaggedTreesModel {
    fn mean_probs(&self, features: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.predict_proba(features).unwrap()) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

impl Model for BaggedTreesModel {
    fn predict(&self, features: &[f64]) -> usize {
        argmax(&self.mean_probs(features))
    }

    fn predict_proba(&self, features: &[f64]) -> Option<Vec<f64>> {
        Some(self.mean_probs(features))
    }

    fn supports_probabilities(&self) -> bool {
        true
    }
}

/// Bootstrap-resampled decision trees; resampling is seeded, so training is
/// deterministic.
#[derive(Debug, Clone)]
pub struct BaggedTrees {
    pub n_trees: usize,
    pub tree: DecisionTree,
    pub seed: u64,
    pub cost: CostModel,
}

impl Default for BaggedTrees {
    fn default() -> Self {
        Self {
            n_trees: 10,
            tree: DecisionTree { max_depth: 8, min_samples_split: 2, ..Default::default() },
            seed: 0,
            cost: CostModel::new(1, CostShape::Log2),
        }
    }
}

impl Learner for BaggedTrees {
    fn name(&self) -> &str {
        "bagged_trees"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn supports_probabilities(&self) -> bool {
        true
    }

    fn train(&self, data: &[&Example], n_classes: usize) -> Result<SharedModel, LearnerError> {
        if data.is_empty() {
            return Err(LearnerError::EmptyTrainingSet);
        }
        let n_classes = n_classes.max(data.iter().map(|e| e.label + 1).max().unwrap_or(1));
        let mut trees = Vec::with_capacity(self.n_trees);
        for t in 0..self.n_trees.max(1) {
            let mut rng = trial_stream(self.seed, "bagging", t);
            let sample: Vec<&Example> = (0..data.len()).map(|_| data[rng.random_range(0..data.len())]).collect();
            trees.push(self.tree.fit(&sample, n_classes)?);
        }
        Ok(Arc::new(BaggedTreesModel { trees, n_classes }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::SyntheticDistribution;
    use crate::rng::substream;

    #[test]
    fn training_is_deterministic_and_probabilities_normalized() {
        let ex = SyntheticDistribution::blobs(2, 2.0, 1.0).sample_many(150, &mut substream(4, "bag"));
        let refs: Vec<&Example> = ex.iter().collect();
        let learner = BaggedTrees::default();
        let a = learner.train(&refs, 2).unwrap();
        let b = learner.train(&refs, 2).unwrap();
        for e in &ex {
            assert_eq!(a.predict(&e.features), b.predict(&e.features));
            let p = a.predict_proba(&e.features).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(argmax(&p), a.predict(&e.features));
        }
    }
}

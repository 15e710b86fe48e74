//! Depth-limited CART classifier with Gini impurity.

use std::sync::Arc;

use crate::clock::{CostModel, CostShape};
use crate::domain::Example;
use crate::model::{argmax, Learner, LearnerError, Model, SharedModel};

#[derive(Debug, Clone)]
enum Node {
    Leaf { probs: Vec<f64> },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone)]
pub struct DecisionTreeModel {
    root: Node,
    n_features: usize,
}

impl DecisionTreeModel {
    fn leaf_probs(&self, features: &[f64]) -> &[f64] {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { probs } => return probs,
                Node::Split { feature, threshold, left, right } => {
                    node = if features[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(left).max(walk(right)),
            }
        }
        walk(&self.root)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

impl Model for DecisionTreeModel {
    fn predict(&self, features: &[f64]) -> usize {
        argmax(self.leaf_probs(features))
    }

    fn predict_proba(&self, features: &[f64]) -> Option<Vec<f64>> {
        Some(self.leaf_probs(features).to_vec())
    }

    fn supports_probabilities(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub cost: CostModel,
}

impl Default for DecisionTree {
    /// Shallow interpretable trees: depth 5, at least 30 samples to split.
    fn default() -> Self {
        Self { max_depth: 5, min_samples_split: 30, cost: CostModel::new(1, CostShape::Log2) }
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    data: &'a [&'a Example],
    n_classes: usize,
    max_depth: usize,
    min_samples_split: usize,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.data[i].label] += 1;
        }
        c
    }

    fn leaf(&self, counts: &[usize], total: usize) -> Node {
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Node::Leaf { probs }
    }

    /// Best `(feature, threshold, weighted child impurity)`; ties keep the
    /// first feature and lowest threshold.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let n_features = self.data[idx[0]].features.len();
        let total = self.counts(idx);
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..n_features {
            order.sort_by(|&a, &b| self.data[a].features[f].total_cmp(&self.data[b].features[f]));
            let mut left = vec![0usize; self.n_classes];
            for j in 1..n {
                left[self.data[order[j - 1]].label] += 1;
                let lo = self.data[order[j - 1]].features[f];
                let hi = self.data[order[j]].features[f];
                if lo >= hi {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let imp = (j as f64 * gini(&left, j) + (n - j) as f64 * gini(&right, n - j)) / n as f64;
                if best.is_none_or(|b| imp < b.2 - 1e-12) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((f, threshold, imp));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }

    fn grow(&self, idx: Vec<usize>, depth: usize) -> Node {
        let counts = self.counts(&idx);
        let total = idx.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || total < self.min_samples_split.max(2) {
            return self.leaf(&counts, total);
        }
        match self.best_split(&idx) {
            None => self.leaf(&counts, total),
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.into_iter().partition(|&i| self.data[i].features[feature] <= threshold);
                Node::Split {
                    feature,
                    threshold,
                    left: Box::new(self.grow(l, depth + 1)),
                    right: Box::new(self.grow(r, depth + 1)),
                }
            }
        }
    }
}

impl DecisionTree {
    pub fn fit(&self, data: &[&Example], n_classes: usize) -> Result<DecisionTreeModel, LearnerError> {
        let first = data.first().ok_or(LearnerError::EmptyTrainingSet)?;
        let n_features = first.features.len();
        if let Some(bad) = data.iter().find(|e| e.features.len() != n_features) {
            return Err(LearnerError::ShapeError { expected: n_features, found: bad.features.len() });
        }
        let n_classes = n_classes.max(data.iter().map(|e| e.label + 1).max().unwrap_or(1));
        let builder = Builder { data, n_classes, max_depth: self.max_depth, min_samples_split: self.min_samples_split };
        let root = builder.grow((0..data.len()).collect(), 0);
        Ok(DecisionTreeModel { root, n_features })
    }
}

impl Learner for DecisionTree {
    fn name(&self) -> &str {
        "decision_tree"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn supports_probabilities(&self) -> bool {
        true
    }

    fn train(&self, data: &[&Example], n_classes: usize) -> Result<SharedModel, LearnerError> {
        Ok(Arc::new(self.fit(data, n_classes)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::accuracy;

    #[test]
    fn defaults_are_interpretable_settings() {
        let t = DecisionTree::default();
        assert_eq!((t.min_samples_split, t.max_depth), (30, 5));
    }

    #[test]
    fn pure_training_set_is_a_single_leaf() {
        let ex: Vec<Example> = (0..40).map(|i| Example::new(vec![i as f64], 1)).collect();
        let refs: Vec<&Example> = ex.iter().collect();
        let m = DecisionTree::default().fit(&refs, 2).unwrap();
        assert_eq!(m.depth(), 0);
        assert_eq!(m.predict(&[3.0]), 1);
        assert_eq!(m.predict_proba(&[3.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn xor_needs_two_levels() {
        let ex = [
            Example::new(vec![0.0, 0.0], 0),
            Example::new(vec![0.0, 1.0], 1),
            Example::new(vec![1.0, 0.0], 1),
            Example::new(vec![1.0, 1.0], 0),
        ];
        let refs: Vec<&Example> = ex.iter().collect();
        let tree = DecisionTree { max_depth: 2, min_samples_split: 2, ..Default::default() };
        let m = tree.fit(&refs, 2).unwrap();
        assert_eq!(accuracy(&m, &refs), 1.0);
        let shallow = DecisionTree { max_depth: 1, min_samples_split: 2, ..Default::default() };
        assert!(accuracy(&shallow.fit(&refs, 2).unwrap(), &refs) < 1.0);
    }

    #[test]
    fn ragged_input_is_a_shape_error() {
        let ex = [Example::new(vec![0.0], 0), Example::new(vec![0.0, 1.0], 1)];
        let refs: Vec<&Example> = ex.iter().collect();
        assert!(matches!(DecisionTree::default().fit(&refs, 2), Err(LearnerError::ShapeError { .. })));
    }
}

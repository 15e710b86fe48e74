//! Linear classifiers: multinomial logistic regression, one-vs-rest linear
//! SVM, and their mini-batch SGD variants.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clock::{CostModel, CostShape};
use crate::domain::Example;
use crate::model::{argmax, IncrementalLearner, Learner, LearnerError, Model, SharedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    /// Softmax over class scores; has probabilities.
    Softmax,
    /// Independent per-class hinge scorers; no probabilities.
    OneVsRest,
}

/// Row-major `n_classes x (n_features + 1)` weights; the last column is the
/// bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub n_features: usize,
    pub n_classes: usize,
    pub kind: LinearKind,
}

impl LinearModel {
    pub fn zeros(n_features: usize, n_classes: usize, kind: LinearKind) -> Self {
        Self { weights: vec![0.0; n_classes * (n_features + 1)], n_features, n_classes, kind }
    }

    fn stride(&self) -> usize {
        self.n_features + 1
    }

    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        scores(&self.weights, self.n_features, self.n_classes, x)
    }
}

fn scores(weights: &[f64], n_features: usize, n_classes: usize, x: &[f64]) -> Vec<f64> {
    let stride = n_features + 1;
    (0..n_classes)
        .map(|c| {
            let row = &weights[c * stride..(c + 1) * stride];
            row[..n_features].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + row[n_features]
        })
        .collect()
}

fn softmax(mut z: Vec<f64>) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    z
}

impl Model for LinearModel {
    fn predict(&self, features: &[f64]) -> usize {
        match self.kind {
            LinearKind::Softmax => argmax(&softmax(self.scores(features))),
            LinearKind::OneVsRest => argmax(&self.scores(features)),
        }
    }

    fn predict_proba(&self, features: &[f64]) -> Option<Vec<f64>> {
        match self.kind {
            LinearKind::Softmax => Some(softmax(self.scores(features))),
            LinearKind::OneVsRest => None,
        }
    }

    fn supports_probabilities(&self) -> bool {
        self.kind == LinearKind::Softmax
    }
}

fn check_shape(batch: &[&Example], n_features: usize) -> Result<(), LearnerError> {
    match batch.iter().find(|e| e.features.len() != n_features) {
        Some(e) => Err(LearnerError::ShapeError { expected: n_features, found: e.features.len() }),
        None => Ok(()),
    }
}

/// Mean cross-entropy plus `l2/2 * |w|^2` (bias excluded) and its gradient
/// with respect to the flat weight vector.
pub fn log_loss_and_gradient(
    weights: &[f64],
    n_features: usize,
    n_classes: usize,
    batch: &[&Example],
    l2: f64,
) -> (f64, Vec<f64>) {
    let stride = n_features + 1;
    let mut grad = vec![0.0; weights.len()];
    let mut loss = 0.0;
    let n = batch.len().max(1) as f64;
    for e in batch {
        let p = softmax(scores(weights, n_features, n_classes, &e.features));
        loss -= p[e.label].max(1e-300).ln();
        for c in 0..n_classes {
            let delta = p[c] - if c == e.label { 1.0 } else { 0.0 };
            let row = &mut grad[c * stride..(c + 1) * stride];
            for (g, x) in row[..n_features].iter_mut().zip(&e.features) {
                *g += delta * x;
            }
            row[n_features] += delta;
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    if l2 > 0.0 {
        for c in 0..n_classes {
            for j in 0..n_features {
                let w = weights[c * stride + j];
                loss += 0.5 * l2 * w * w;
                grad[c * stride + j] += l2 * w;
            }
        }
    }
    (loss, grad)
}

/// Mean one-vs-rest hinge loss plus `l2/2 * |w|^2` and a subgradient.
pub fn hinge_loss_and_subgradient(
    weights: &[f64],
    n_features: usize,
    n_classes: usize,
    batch: &[&Example],
    l2: f64,
) -> (f64, Vec<f64>) {
    let stride = n_features + 1;
    let mut grad = vec![0.0; weights.len()];
    let mut loss = 0.0;
    let n = batch.len().max(1) as f64;
    for e in batch {
        let s = scores(weights, n_features, n_classes, &e.features);
        for c in 0..n_classes {
            let y = if c == e.label { 1.0 } else { -1.0 };
            let margin = y * s[c];
            if margin < 1.0 {
                loss += 1.0 - margin;
                let row = &mut grad[c * stride..(c + 1) * stride];
                for (g, x) in row[..n_features].iter_mut().zip(&e.features) {
                    *g -= y * x;
                }
                row[n_features] -= y;
            }
        }
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for c in 0..n_classes {
        for j in 0..n_features {
            let w = weights[c * stride + j];
            loss += 0.5 * l2 * w * w;
            grad[c * stride + j] += l2 * w;
        }
    }
    (loss, grad)
}

fn descend(weights: &mut [f64], grad: &[f64], lr: f64) {
    for (w, g) in weights.iter_mut().zip(grad) {
        *w -= lr * g;
    }
}

fn infer_shape(data: &[&Example], n_classes: usize) -> Result<(usize, usize), LearnerError> {
    let first = data.first().ok_or(LearnerError::EmptyTrainingSet)?;
    let d = first.features.len();
    check_shape(data, d)?;
    let k = n_classes.max(data.iter().map(|e| e.label + 1).max().unwrap_or(1)).max(2);
    Ok((d, k))
}

/// Multinomial logistic regression by full-batch gradient descent from zero.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub cost: CostModel,
}

impl Default for LogisticRegression {
    fn default() -> Self {
        Self { epochs: 100, lr: 0.5, l2: 1e-4, cost: CostModel::new(1, CostShape::Constant) }
    }
}

impl LogisticRegression {
    pub fn fit(&self, data: &[&Example], n_classes: usize) -> Result<LinearModel, LearnerError> {
        let (d, k) = infer_shape(data, n_classes)?;
        let mut model = LinearModel::zeros(d, k, LinearKind::Softmax);
        for _ in 0..self.epochs {
            let (_, g) = log_loss_and_gradient(&model.weights, d, k, data, self.l2);
            descend(&mut model.weights, &g, self.lr);
        }
        Ok(model)
    }
}

impl Learner for LogisticRegression {
    fn name(&self) -> &str {
        "logistic_regression"
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

/// One-vs-rest linear SVM by full-batch hinge subgradient descent.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub cost: CostModel,
}

impl Default for LinearSvm {
    fn default() -> Self {
        Self { epochs: 100, lr: 0.1, l2: 1e-3, cost: CostModel::new(2, CostShape::Constant) }
    }
}

impl LinearSvm {
    pub fn fit(&self, data: &[&Example], n_classes: usize) -> Result<LinearModel, LearnerError> {
        let (d, k) = infer_shape(data, n_classes)?;
        let mut model = LinearModel::zeros(d, k, LinearKind::OneVsRest);
        for _ in 0..self.epochs {
            let (_, g) = hinge_loss_and_subgradient(&model.weights, d, k, data, self.l2);
            descend(&mut model.weights, &g, self.lr);
        }
        Ok(model)
    }
}

impl Learner for LinearSvm {
    fn name(&self) -> &str {
        "linear_svm"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn train(&self, data: &[&Example], n_classes: usize) -> Result<SharedModel, LearnerError> {
        Ok(Arc::new(self.fit(data, n_classes)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SgdLoss {
    Hinge,
    Log,
}

impl SgdLoss {
    /// Mini-batch sizes that worked best for each loss: 256 for hinge, 512
    /// for log loss.
    pub fn default_batch(self) -> usize {
        match self {
            SgdLoss::Hinge => 256,
            SgdLoss::Log => 512,
        }
    }
}

/// Constant-step mini-batch SGD on hinge or log loss.
#[derive(Debug, Clone)]
pub struct SgdClassifier {
    pub loss: SgdLoss,
    pub lr: f64,
    pub l2: f64,
    pub n_classes: usize,
    pub cost: CostModel,
}

impl SgdClassifier {
    pub fn new(loss: SgdLoss) -> Self {
        Self { loss, lr: 0.05, l2: 1e-4, n_classes: 2, cost: CostModel::new(1, CostShape::Constant) }
    }
}

impl IncrementalLearner for SgdClassifier {
    type State = LinearModel;

    fn name(&self) -> &str {
        match self.loss {
            SgdLoss::Hinge => "sgd_hinge",
            SgdLoss::Log => "sgd_log",
        }
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn initial_state(&self, n_features: usize, n_classes: usize) -> LinearModel {
        let kind = match self.loss {
            SgdLoss::Hinge => LinearKind::OneVsRest,
            SgdLoss::Log => LinearKind::Softmax,
        };
        LinearModel::zeros(n_features, n_classes.max(2), kind)
    }

    fn partial_update(&self, state: &mut LinearModel, batch: &[&Example]) -> Result<(), LearnerError> {
        check_shape(batch, state.n_features)?;
        if batch.is_empty() {
            return Ok(());
        }
        let (d, k) = (state.n_features, state.n_classes);
        let (_, g) = match self.loss {
            SgdLoss::Hinge => hinge_loss_and_subgradient(&state.weights, d, k, batch, self.l2),
            SgdLoss::Log => log_loss_and_gradient(&state.weights, d, k, batch, self.l2),
        };
        descend(&mut state.weights, &g, self.lr);
        debug_assert_eq!(state.weights.len(), k * state.stride());
        Ok(())
    }
}

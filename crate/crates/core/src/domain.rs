//! Labeled examples, the finite example pool and synthetic sources.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::StreamRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PoolError {
    #[error("pool exhausted: no unseen or fallback examples remain")]
    PoolExhausted,
    #[error("example {index} has {found} features, expected {expected}")]
    ShapeMismatch { index: usize, expected: usize, found: usize },
    #[error("example {index} has label {label}, but the pool declares {n_classes} classes")]
    LabelOutOfRange { index: usize, label: usize, n_classes: usize },
    #[error("pool is empty")]
    Empty,
}

/// A feature vector with its class label in `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: usize,
}

impl Example {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Unseen,
    /// Handed out in an earlier round, never added to a training set.
    Drawn,
    /// Handed out in the current round.
    InFlight,
    InTraining,
}

/// Result of [`ExamplePool::sample_unseen`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Draw {
    pub indices: Vec<usize>,
    /// How many of `indices` came from the fallback set.
    pub from_fallback: usize,
}

impl Draw {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A finite pool of labeled examples sampled without replacement.
///
/// Once every example has been handed out, draws fall back to examples that
/// were handed out before but never added to a training set.
#[derive(Debug, Clone)]
pub struct ExamplePool {
    examples: Vec<Example>,
    n_classes: usize,
    n_features: usize,
    order: Vec<usize>,
    cursor: usize,
    status: Vec<Status>,
    rng: StreamRng,
    fallback_engaged: bool,
}

impl ExamplePool {
    pub fn new(examples: Vec<Example>, n_classes: usize, mut rng: StreamRng) -> Result<Self, PoolError> {
        let first = examples.first().ok_or(PoolError::Empty)?;
        let n_features = first.features.len();
        for (index, e) in examples.iter().enumerate() {
            if e.features.len() != n_features {
                return Err(PoolError::ShapeMismatch { index, expected: n_features, found: e.features.len() });
            }
            if e.label >= n_classes {
                return Err(PoolError::LabelOutOfRange { index, label: e.label, n_classes });
            }
        }
        let mut order: Vec<usize> = (0..examples.len()).collect();
        order.shuffle(&mut rng);
        let status = vec![Status::Unseen; examples.len()];
        Ok(Self { examples, n_classes, n_features, order, cursor: 0, status, rng, fallback_engaged: false })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn example(&self, index: usize) -> &Example {
        &self.examples[index]
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn gather(&self, indices: &[usize]) -> Vec<&Example> {
        indices.iter().map(|&i| &self.examples[i]).collect()
    }

    pub fn unseen_remaining(&self) -> usize {
        self.examples.len() - self.cursor
    }

    pub fn fallback_remaining(&self) -> usize {
        self.status.iter().filter(|s| **s == Status::Drawn).count()
    }

    /// True once any draw had to use the fallback set.
    pub fn fallback_engaged(&self) -> bool {
        self.fallback_engaged
    }

    pub fn rng_mut(&mut self) -> &mut StreamRng {
        &mut self.rng
    }

    /// Hands out up to `n` examples never handed out before; when those run
    /// out, tops up from examples that were drawn but never trained on.
    pub fn sample_unseen(&mut self, n: usize) -> Result<Draw, PoolError> {
        let mut draw = Draw::default();
        if n == 0 {
            return Ok(draw);
        }
        let fresh = n.min(self.unseen_remaining());
        for &idx in &self.order[self.cursor..self.cursor + fresh] {
            self.status[idx] = Status::InFlight;
            draw.indices.push(idx);
        }
        self.cursor += fresh;

        let missing = n - fresh;
        if missing > 0 {
            let mut candidates: Vec<usize> =
                (0..self.examples.len()).filter(|&i| self.status[i] == Status::Drawn).collect();
            if !candidates.is_empty() {
                self.fallback_engaged = true;
            }
            let take = missing.min(candidates.len());
            let (chosen, _) = candidates.partial_shuffle(&mut self.rng, take);
            for &idx in chosen.iter() {
                self.status[idx] = Status::InFlight;
                draw.indices.push(idx);
            }
            draw.from_fallback = take;
        }
        if draw.is_empty() {
            return Err(PoolError::PoolExhausted);
        }
        Ok(draw)
    }

    /// Marks examples as part of the training set; they never return to the
    /// fallback set.
    pub fn commit(&mut self, indices: &[usize]) {
        for &i in indices {
            self.status[i] = Status::InTraining;
        }
    }

    /// Ends a round: in-flight examples not committed become fallback-eligible.
    pub fn release_in_flight(&mut self) {
        for s in self.status.iter_mut() {
            if *s == Status::InFlight {
                *s = Status::Drawn;
            }
        }
    }

    /// Fraction of examples with the most common label.
    pub fn majority_rate(&self) -> f64 {
        majority_rate(self.examples.iter(), self.n_classes)
    }
}

pub fn majority_rate<'a>(examples: impl Iterator<Item = &'a Example>, n_classes: usize) -> f64 {
    let mut counts = vec![0usize; n_classes.max(1)];
    let mut total = 0usize;
    for e in examples {
        counts[e.label] += 1;
        total += 1;
    }
    if total == 0 {
        return 0.0;
    }
    *counts.iter().max().unwrap() as f64 / total as f64
}

/// Shape of a synthetic labeled distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticKind {
    /// x uniform on `[lo, hi]`, label 1 iff `x >= threshold`.
    ThresholdUniform { lo: f64, hi: f64, threshold: f64 },
    /// Point `i` (feature `[i]`) with probability `weights[i]` and label `labels[i]`.
    FiniteWeighted { weights: Vec<f64>, labels: Vec<usize> },
    /// Two isotropic Gaussian classes.
    GaussianTwoClass { mean0: Vec<f64>, mean1: Vec<f64>, std: f64, prior1: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("point weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("weights and labels differ in length")]
    LengthMismatch,
    #[error("invalid parameter: {0}")]
    Invalid(&'static str),
}

/// A labeled distribution that can be sampled without limit.
#[derive(Debug, Clone)]
pub struct SyntheticDistribution {
    kind: SyntheticKind,
    weighted: Option<WeightedIndex<f64>>,
    normal: Option<Normal<f64>>,
}

impl SyntheticDistribution {
    pub fn new(kind: SyntheticKind) -> Result<Self, DistributionError> {
        let mut weighted = None;
        let mut normal = None;
        match &kind {
            SyntheticKind::ThresholdUniform { lo, hi, .. } => {
                if !(lo < hi) {
                    return Err(DistributionError::Invalid("threshold support requires lo < hi"));
                }
            }
            SyntheticKind::FiniteWeighted { weights, labels } => {
                if weights.len() != labels.len() {
                    return Err(DistributionError::LengthMismatch);
                }
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(DistributionError::WeightsNotNormalized(sum));
                }
                weighted = Some(WeightedIndex::new(weights).map_err(|_| DistributionError::Invalid("bad weights"))?);
            }
            SyntheticKind::GaussianTwoClass { mean0, mean1, std, prior1 } => {
                if mean0.len() != mean1.len() || mean0.is_empty() {
                    return Err(DistributionError::Invalid("class means must share a non-zero dimension"));
                }
                if !(0.0..=1.0).contains(prior1) {
                    return Err(DistributionError::Invalid("prior must lie in [0, 1]"));
                }
                normal = Some(Normal::new(0.0, *std).map_err(|_| DistributionError::Invalid("bad std"))?);
            }
        }
        Ok(Self { kind, weighted, normal })
    }

    /// Two Gaussian blobs centered at `-sep/2` and `+sep/2` on every axis.
    pub fn blobs(dim: usize, separation: f64, std: f64) -> Self {
        let half = separation / 2.0;
        Self::new(SyntheticKind::GaussianTwoClass { mean0: vec![-half; dim], mean1: vec![half; dim], std, prior1: 0.5 })
            .expect("valid blob parameters")
    }

    pub fn kind(&self) -> &SyntheticKind {
        &self.kind
    }

    pub fn n_classes(&self) -> usize {
        match &self.kind {
            SyntheticKind::FiniteWeighted { labels, .. } => labels.iter().max().map_or(1, |m| m + 1).max(2),
            _ => 2,
        }
    }

    pub fn n_features(&self) -> usize {
        match &self.kind {
            SyntheticKind::GaussianTwoClass { mean0, .. } => mean0.len(),
            _ => 1,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Example {
        match &self.kind {
            SyntheticKind::ThresholdUniform { lo, hi, threshold } => {
                let x = rng.random_range(*lo..*hi);
                Example::new(vec![x], usize::from(x >= *threshold))
            }
            SyntheticKind::FiniteWeighted { labels, .. } => {
                let i = self.weighted.as_ref().unwrap().sample(rng);
                Example::new(vec![i as f64], labels[i])
            }
            SyntheticKind::GaussianTwoClass { mean0, mean1, prior1, .. } => {
                let label = usize::from(rng.random_bool(*prior1));
                let mean = if label == 1 { mean1 } else { mean0 };
                let noise = self.normal.as_ref().unwrap();
                let features = mean.iter().map(|m| m + noise.sample(rng)).collect();
                Example::new(features, label)
            }
        }
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Example> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

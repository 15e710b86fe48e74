//! ERM over a finite hypothesis class on a finite point set.

use std::sync::Arc;

use thiserror::Error;

use crate::clock::CostModel;
use crate::domain::Example;
use crate::model::{Learner, LearnerError, Model, SharedModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassError {
    #[error("hypothesis {index} labels {found} points, expected {expected}")]
    Incomplete { index: usize, expected: usize, found: usize },
    #[error("labels must be +1 or -1")]
    BadLabel,
    #[error("class must contain at least one hypothesis")]
    Empty,
}

/// Hypotheses as full `±1` label tables over points `0..n_points`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHypothesisClass {
    n_points: usize,
    labels: Vec<Vec<i8>>,
    names: Vec<String>,
}

impl FiniteHypothesisClass {
    pub fn new(n_points: usize, labels: Vec<Vec<i8>>, names: Vec<String>) -> Result<Self, ClassError> {
        if labels.is_empty() {
            return Err(ClassError::Empty);
        }
        for (index, h) in labels.iter().enumerate() {
            if h.len() != n_points {
                return Err(ClassError::Incomplete { index, expected: n_points, found: h.len() });
            }
            if h.iter().any(|&y| y != 1 && y != -1) {
                return Err(ClassError::BadLabel);
            }
        }
        let mut names = names;
        names.resize_with(labels.len(), String::new);
        for (i, n) in names.iter_mut().enumerate() {
            if n.is_empty() {
                *n = format!("h{}", i + 1);
            }
        }
        Ok(Self { n_points, labels, names })
    }

    /// Builds a class from the sets of points each hypothesis labels `+1`.
    pub fn from_positive_sets(n_points: usize, sets: &[(&str, &[usize])]) -> Result<Self, ClassError> {
        let labels = sets
            .iter()
            .map(|(_, pos)| (0..n_points).map(|p| if pos.contains(&p) { 1 } else { -1 }).collect())
            .collect();
        let names = sets.iter().map(|(n, _)| n.to_string()).collect();
        Self::new(n_points, labels, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn name(&self, h: usize) -> &str {
        &self.names[h]
    }

    pub fn label(&self, h: usize, point: usize) -> i8 {
        self.labels[h][point]
    }

    pub fn table(&self, h: usize) -> &[i8] {
        &self.labels[h]
    }

    /// Sample mistakes of every hypothesis on `train`.
    pub fn sample_errors(&self, train: &[(usize, i8)]) -> Vec<usize> {
        let mut tally = vec![[0usize; 2]; self.n_points];
        for &(p, y) in train {
            tally[p][usize::from(y == 1)] += 1;
        }
        self.errors_from_tally(&tally)
    }

    /// `tally[p] = [count labeled -1, count labeled +1]`.
    pub fn errors_from_tally(&self, tally: &[[usize; 2]]) -> Vec<usize> {
        self.labels
            .iter()
            .map(|h| h.iter().zip(tally).map(|(&pred, counts)| if pred == 1 { counts[0] } else { counts[1] }).sum())
            .collect()
    }
}

/// Index of the hypothesis with the fewest sample mistakes; ties go to the
/// lowest index.
pub fn finite_erm(class: &FiniteHypothesisClass, train: &[(usize, i8)]) -> usize {
    lowest_argmin(&class.sample_errors(train))
}

pub(crate) fn lowest_argmin(errors: &[usize]) -> usize {
    let mut best = 0;
    for (i, &e) in errors.iter().enumerate() {
        if e < errors[best] {
            best = i;
        }
    }
    best
}

/// A member of a finite class used as a black-box model; feature 0 is the
/// point index.
#[derive(Debug, Clone)]
pub struct FiniteHypothesisModel {
    pub index: usize,
    table: Vec<i8>,
}

impl Model for FiniteHypothesisModel {
    fn predict(&self, features: &[f64]) -> usize {
        usize::from(self.table[features[0] as usize] == 1)
    }
}

#[derive(Debug, Clone)]
pub struct FiniteErmLearner {
    pub class: FiniteHypothesisClass,
    pub cost: CostModel,
}

impl Learner for FiniteErmLearner {
    fn name(&self) -> &str {
        "finite_erm"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn train(&self, data: &[&Example], _n_classes: usize) -> Result<SharedModel, LearnerError> {
        let mut pairs = Vec::with_capacity(data.len());
        for e in data {
            if e.features.len() != 1 {
                return Err(LearnerError::ShapeError { expected: 1, found: e.features.len() });
            }
            pairs.push((e.features[0] as usize, if e.label == 1 { 1 } else { -1 }));
        }
        let index = finite_erm(&self.class, &pairs);
        Ok(Arc::new(FiniteHypothesisModel { index, table: self.class.table(index).to_vec() }))
    }
}

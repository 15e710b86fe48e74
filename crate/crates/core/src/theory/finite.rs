//! A finite point set with point weights, a deterministic labeling and a
//! finite hypothesis class learned by ERM.

use rand::distr::Distribution;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Geometric;

use crate::clock::CostModel;
use crate::learners::finite::{lowest_argmin, FiniteHypothesisClass};
use crate::rng::StreamRng;
use crate::teachers::{TeachingInstance, WrongDraw};

use super::TheoryError;

#[derive(Debug, Clone)]
struct WrongRegion {
    points: Vec<usize>,
    mass: f64,
    sampler: Option<WeightedAliasIndex<f64>>,
}

/// Samples are point indices; the label of point `p` is `target[p]`.
#[derive(Debug, Clone)]
pub struct FiniteInstance {
    class: FiniteHypothesisClass,
    target: Vec<i8>,
    weights: Vec<f64>,
    sampler: WeightedAliasIndex<f64>,
    regions: Vec<WrongRegion>,
    cost: CostModel,
}

impl FiniteInstance {
    pub fn new(
        class: FiniteHypothesisClass,
        target: Vec<i8>,
        weights: Vec<f64>,
        cost: CostModel,
    ) -> Result<Self, TheoryError> {
        let n = class.n_points();
        if target.len() != n || weights.len() != n {
            return Err(TheoryError::InvalidParams("target and weights must cover every point".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(TheoryError::InvalidParams(format!("point weights sum to {total}, expected 1")));
        }
        let sampler = WeightedAliasIndex::new(weights.clone())
            .map_err(|e| TheoryError::InvalidParams(format!("weights: {e}")))?;
        let regions = (0..class.len())
            .map(|h| {
                let points: Vec<usize> = (0..n).filter(|&p| class.label(h, p) != target[p]).collect();
                let w: Vec<f64> = points.iter().map(|&p| weights[p]).collect();
                let mass = w.iter().sum();
                let sampler = if mass > 0.0 { WeightedAliasIndex::new(w).ok() } else { None };
                WrongRegion { points, mass, sampler }
            })
            .collect();
        Ok(Self { class, target, weights, sampler, regions, cost })
    }

    pub fn class(&self) -> &FiniteHypothesisClass {
        &self.class
    }

    pub fn target(&self) -> &[i8] {
        &self.target
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Error of hypothesis `h` under the point weights.
    pub fn error(&self, h: usize) -> f64 {
        self.regions[h].mass
    }

    /// Smallest error in the class.
    pub fn best_error(&self) -> f64 {
        self.regions.iter().map(|r| r.mass).fold(f64::INFINITY, f64::min)
    }

    pub fn erm(&self, samples: &[usize]) -> usize {
        let mut tally = vec![[0usize; 2]; self.class.n_points()];
        for &p in samples {
            tally[p][usize::from(self.target[p] == 1)] += 1;
        }
        lowest_argmin(&self.class.errors_from_tally(&tally))
    }

    pub fn draw_point(&self, rng: &mut StreamRng) -> usize {
        self.sampler.sample(rng)
    }
}

impl TeachingInstance for FiniteInstance {
    type Sample = usize;
    type Hypothesis = usize;

    fn name(&self) -> &str {
        "finite_erm"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn draw(&self, rng: &mut StreamRng) -> usize {
        self.draw_point(rng)
    }

    fn train(&self, samples: &[usize]) -> usize {
        self.erm(samples)
    }

    fn is_wrong(&self, h: &usize, p: &usize) -> bool {
        self.class.label(*h, *p) != self.target[*p]
    }

    /// Same law as rejection sampling: the number of draws is geometric in
    /// the wrong mass and the accepted point follows the weights restricted
    /// to the wrong region.
    fn draw_wrong(&self, h: &usize, rng: &mut StreamRng, limit: u64) -> WrongDraw<usize> {
        let region = &self.regions[*h];
        let Some(sampler) = &region.sampler else {
            return WrongDraw::Exhausted { draws: limit };
        };
        let failures = Geometric::new(region.mass.min(1.0)).expect("mass in (0, 1]").sample(rng);
        if failures >= limit {
            return WrongDraw::Exhausted { draws: limit };
        }
        WrongDraw::Found { sample: region.points[sampler.sample(rng)], draws: failures + 1 }
    }

    fn true_error(&self, h: &usize) -> Option<f64> {
        Some(self.error(*h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn tiny() -> FiniteInstance {
        let class = FiniteHypothesisClass::from_positive_sets(3, &[("a", &[0]), ("b", &[0, 1])]).unwrap();
        FiniteInstance::new(class, vec![1, -1, -1], vec![0.5, 0.25, 0.25], CostModel::default()).unwrap()
    }

    #[test]
    fn errors_are_wrong_region_masses() {
        let inst = tiny();
        assert_eq!(inst.error(0), 0.0);
        assert_eq!(inst.error(1), 0.25);
        assert_eq!(inst.best_error(), 0.0);
    }

    #[test]
    fn exact_wrong_sampler_matches_rejection_in_law() {
        let inst = tiny();
        let mut rng = substream(5, "wrong");
        let n = 20_000;
        let mut draws_exact = 0u64;
        for _ in 0..n {
            match inst.draw_wrong(&1, &mut rng, 1_000_000) {
                WrongDraw::Found { sample, draws } => {
                    assert_eq!(sample, 1);
                    draws_exact += draws;
                }
                WrongDraw::Exhausted { .. } => panic!("region has mass"),
            }
        }
        // mean of a geometric count with success probability 1/4 is 4
        let mean = draws_exact as f64 / n as f64;
        assert!((mean - 4.0).abs() < 0.1, "mean draws {mean}");
        assert!(matches!(inst.draw_wrong(&0, &mut rng, 10), WrongDraw::Exhausted { draws: 10 }));
    }
}

//! Fallback guarantees of the base teacher: given a constant-factor larger
//! budget it does at least as well as the one-shot batch teacher, and in the
//! agnostic case loses at most `alpha / (1 - alpha)` extra error.

use num_rational::Rational64;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::finite::FiniteInstance;
use super::TheoryError;
use crate::clock::{CostClock, CostModel, CostShape, TimeBudget};
use crate::learners::finite::FiniteHypothesisClass;
use crate::rng::{substream, trial_stream};
use crate::stats::{lower_median, quantile};
use crate::teachers::{run_tctbase, RunEnv, TctBaseParams};

/// `2 (2 / (1 - alpha))^(k + 1)`
pub fn time_multiplier(alpha: f64, k: u32) -> f64 {
    2.0 * (2.0 / (1.0 - alpha)).powi(k as i32 + 1)
}

/// [`time_multiplier`] in exact rational arithmetic.
pub fn time_multiplier_exact(alpha: Rational64, k: u32) -> Rational64 {
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    two * (two / (one - alpha)).pow(k as i32 + 1)
}

/// `alpha / (1 - alpha)`
pub fn agnostic_slack(alpha: f64) -> f64 {
    alpha / (1.0 - alpha)
}

pub fn agnostic_slack_exact(alpha: Rational64) -> Rational64 {
    alpha / (Rational64::from_integer(1) - alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackConfig {
    pub class_size: usize,
    pub n_points: usize,
    /// Non-target hypotheses differ from the target on 1..=max_flips points.
    pub max_flips: usize,
    pub alpha: f64,
    pub k: u32,
    pub delta: f64,
    pub trials: usize,
    pub budgets: Vec<f64>,
    /// Leave the target out of the class.
    pub agnostic: bool,
    pub seed: u64,
}

impl FallbackConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            class_size: 32,
            n_points: 64,
            max_flips: 8,
            alpha: 0.2,
            k: 2,
            delta: 0.1,
            trials: 200,
            budgets: vec![100.0, 400.0, 1600.0],
            agnostic: false,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackRow {
    pub budget: f64,
    pub m_t: usize,
    pub extended_budget: f64,
    /// TBatch's `(1 - delta)`-quantile error (excess error when agnostic).
    pub eps_t: f64,
    pub tbatch_median_error: f64,
    pub tct_median_error: f64,
    /// Trials where the base teacher's error broke the bound.
    pub violations: usize,
    pub violation_rate: f64,
    /// Trials whose returned hypothesis saw at least `m_t` unbiased samples
    /// or found no mistakes to sample.
    pub unbiased_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackReport {
    pub config: FallbackConfig,
    pub multiplier: f64,
    pub slack: f64,
    pub best_error: f64,
    pub rows: Vec<FallbackRow>,
}

impl FallbackReport {
    pub fn max_violation_rate(&self) -> f64 {
        self.rows.iter().map(|r| r.violation_rate).fold(0.0, f64::max)
    }
}

/// Random instance: random target labels and point weights; the class holds
/// perturbations of the target (and the target itself when realizable).
pub fn random_instance(config: &FallbackConfig) -> Result<FiniteInstance, TheoryError> {
    if config.class_size == 0 || config.n_points == 0 || config.max_flips == 0 || config.max_flips > config.n_points {
        return Err(TheoryError::InvalidParams("class, point set and flip range must be non-empty".into()));
    }
    let mut rng = substream(config.seed, "fallback/instance");
    let n = config.n_points;
    let target: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let mut labels = Vec::with_capacity(config.class_size);
    if !config.agnostic {
        labels.push(target.clone());
    }
    let points: Vec<usize> = (0..n).collect();
    while labels.len() < config.class_size {
        let flips = rng.random_range(1..=config.max_flips);
        let mut h = target.clone();
        for &p in points.choose_multiple(&mut rng, flips) {
            h[p] = -h[p];
        }
        labels.push(h);
    }
    labels.shuffle(&mut rng);
    let class =
        FiniteHypothesisClass::new(n, labels, Vec::new()).map_err(|e| TheoryError::InvalidParams(e.to_string()))?;
    FiniteInstance::new(class, target, weights, CostModel::new(config.k, CostShape::Constant))
}

pub fn verify_fallback_bounds(config: &FallbackConfig) -> Result<FallbackReport, TheoryError> {
    if !(0.0..1.0).contains(&config.alpha) || config.trials == 0 {
        return Err(TheoryError::InvalidParams("alpha must lie in [0, 1) and trials be positive".into()));
    }
    let instance = random_instance(config)?;
    let best_error = instance.best_error();
    let multiplier = time_multiplier(config.alpha, config.k);
    let slack = agnostic_slack(config.alpha);
    let cost = CostModel::new(config.k, CostShape::Constant);
    let params = TctBaseParams { max_rounds: 40, ..TctBaseParams::new(config.alpha) };

    let mut rows = Vec::with_capacity(config.budgets.len());
    for (b, &budget) in config.budgets.iter().enumerate() {
        let m_t = cost.max_affordable(budget);
        if m_t == 0 {
            return Err(TheoryError::InvalidParams(format!("budget {budget} does not cover one sample")));
        }
        let tbatch: Vec<f64> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_stream(config.seed, &format!("fallback/tbatch/{b}"), t);
                let samples: Vec<usize> = (0..m_t).map(|_| instance.draw_point(&mut rng)).collect();
                instance.error(instance.erm(&samples)) - best_error
            })
            .collect();
        let eps_t = quantile(&tbatch, 1.0 - config.delta);

        let extended_budget = budget * multiplier;
        let tct: Vec<(f64, bool)> = (0..config.trials)
            .into_par_iter()
            .map(|t| -> Result<_, TheoryError> {
                let rng = trial_stream(config.seed, &format!("fallback/tct/{b}"), t);
                let budget = TimeBudget::new(extended_budget).expect("positive budget");
                let mut env = RunEnv::new(CostClock::simulated(0.0), budget, rng);
                let out = run_tctbase(&instance, &params, &mut env)?;
                let error = out.returned_error().ok_or(TheoryError::InvalidParams("budget below one sample".into()))?;
                let covered = out.unbiased.last().is_some_and(|&u| u >= m_t) || error == 0.0;
                Ok((error - best_error, covered))
            })
            .collect::<Result<_, _>>()?;

        let allowed = if config.agnostic { eps_t + slack } else { eps_t };
        let violations = tct.iter().filter(|(e, _)| *e > allowed + 1e-12).count();
        let tct_errors: Vec<f64> = tct.iter().map(|r| r.0).collect();
        rows.push(FallbackRow {
            budget,
            m_t,
            extended_budget,
            eps_t,
            tbatch_median_error: lower_median(&tbatch),
            tct_median_error: lower_median(&tct_errors),
            violations,
            violation_rate: violations as f64 / config.trials as f64,
            unbiased_covered: tct.iter().filter(|r| r.1).count(),
        });
    }
    Ok(FallbackReport { config: config.clone(), multiplier, slack, best_error, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_goldens() {
        assert_eq!(time_multiplier_exact(Rational64::new(1, 3), 2), Rational64::from_integer(54));
        assert_eq!(time_multiplier(0.5, 1), 32.0);
        assert_eq!(time_multiplier_exact(Rational64::new(1, 2), 1), Rational64::from_integer(32));
        assert!((time_multiplier(1.0 / 3.0, 2) - 54.0).abs() < 1e-9);
    }

    #[test]
    fn slack_goldens() {
        assert_eq!(agnostic_slack(0.2), 0.25);
        assert_eq!(agnostic_slack_exact(Rational64::new(1, 5)), Rational64::new(1, 4));
    }

    #[test]
    fn realizable_instance_contains_target() {
        let cfg = FallbackConfig::new(3);
        let inst = random_instance(&cfg).unwrap();
        assert_eq!(inst.class().len(), 32);
        assert_eq!(inst.best_error(), 0.0);
        let agn = random_instance(&FallbackConfig { agnostic: true, ..cfg }).unwrap();
        assert!(agn.best_error() > 0.0);
    }
}

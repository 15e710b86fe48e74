//! Learning a 1-D threshold: the base teacher against the one-shot batch,
//! plus per-round measurements of the uncertainty interval around `v*`.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TheoryError;
use crate::clock::{CostClock, CostModel, CostShape, TimeBudget};
use crate::learners::threshold::{threshold_erm, ThresholdHypothesis};
use crate::rng::{trial_stream, StreamRng};
use crate::stats::{linear_fit, lower_median};
use crate::teachers::{run_tctbase, RunEnv, TctBaseParams, TeachingInstance, WrongDraw};

/// `x` uniform on `[lo, hi)`, label `+1` iff `x >= v_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInstance {
    pub lo: f64,
    pub hi: f64,
    pub v_star: f64,
    pub cost: CostModel,
}

impl ThresholdInstance {
    /// Support `[-1/2, 1/2)` with `v* = 0`, which keeps interval endpoints
    /// near `v*` at full floating-point resolution.
    pub fn centered(k: u32) -> Self {
        Self { lo: -0.5, hi: 0.5, v_star: 0.0, cost: CostModel::new(k, CostShape::Constant) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Measure of `[a, b)` intersected with the support.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        ((b - a) / self.width()).max(0.0)
    }

    /// Error of threshold `v`: the mass between `v` and `v*`.
    pub fn error_of(&self, v: f64) -> f64 {
        self.mass(v.min(self.v_star), v.max(self.v_star))
    }

    pub fn label(&self, x: f64) -> i8 {
        if x >= self.v_star {
            1
        } else {
            -1
        }
    }

    /// Largest open interval around `v*` free of `xs`.
    pub fn uncertainty_interval(&self, xs: &[(f64, i8)]) -> UncertaintyInterval {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for &(x, _) in xs {
            if x < self.v_star {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
        }
        UncertaintyInterval {
            lo,
            hi,
            left_weight: self.mass(lo, self.v_star),
            right_weight: self.mass(self.v_star, hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyInterval {
    pub lo: f64,
    pub hi: f64,
    pub left_weight: f64,
    pub right_weight: f64,
}

impl UncertaintyInterval {
    pub fn contains(&self, other: &UncertaintyInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn mass(&self) -> f64 {
        self.left_weight + self.right_weight
    }
}

impl TeachingInstance for ThresholdInstance {
    type Sample = (f64, i8);
    type Hypothesis = ThresholdHypothesis;

    fn name(&self) -> &str {
        "threshold"
    }

    fn cost_model(&self) -> CostModel {
        self.cost
    }

    fn draw(&self, rng: &mut StreamRng) -> (f64, i8) {
        let x = rng.random_range(self.lo..self.hi);
        (x, self.label(x))
    }

    fn train(&self, samples: &[(f64, i8)]) -> ThresholdHypothesis {
        threshold_erm(samples)
    }

    fn is_wrong(&self, h: &ThresholdHypothesis, s: &(f64, i8)) -> bool {
        h.classify(s.0) != s.1
    }

    /// The error region is the interval between `v` and `v*`; draw counts
    /// are geometric in its mass and accepted points uniform inside it.
    fn draw_wrong(&self, h: &ThresholdHypothesis, rng: &mut StreamRng, limit: u64) -> WrongDraw<(f64, i8)> {
        let a = h.v.min(self.v_star).max(self.lo);
        let b = h.v.max(self.v_star).min(self.hi);
        let mass = self.mass(a, b);
        if !(mass > 0.0) {
            return WrongDraw::Exhausted { draws: limit };
        }
        let failures = Geometric::new(mass.min(1.0)).expect("mass in (0, 1]").sample(rng);
        if failures >= limit {
            return WrongDraw::Exhausted { draws: limit };
        }
        let x = rng.random_range(a..b);
        WrongDraw::Found { sample: (x, self.label(x)), draws: failures + 1 }
    }

    fn true_error(&self, h: &ThresholdHypothesis) -> Option<f64> {
        Some(self.error_of(h.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub eps: f64,
    pub alpha: f64,
    pub k: u32,
    pub trials: usize,
    pub delta: f64,
    pub seed: u64,
}

impl ThresholdConfig {
    pub fn new(eps: f64, alpha: f64, seed: u64) -> Self {
        Self { eps, alpha, k: 2, trials: 200, delta: 0.1, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub config: ThresholdConfig,
    /// Medians over trials.
    pub tct_rounds: usize,
    pub tct_samples: usize,
    /// Mean over trials of `log2` of the final set size.
    pub tct_log2_samples: f64,
    pub tct_time: f64,
    pub tbatch_samples: usize,
    pub tbatch_time: f64,
    /// Set when `eps > delta`, outside the regime the speedup bound covers.
    pub eps_exceeds_delta: bool,
}

/// Smallest `eps` the interval arithmetic resolves on the centered support.
pub const MIN_EPS: f64 = 1e-12;

/// Samples until the uncertainty interval has mass at most `eps`.
pub fn tbatch_stopping_samples(instance: &ThresholdInstance, eps: f64, rng: &mut StreamRng) -> usize {
    let mut lo = instance.lo;
    let mut hi = instance.hi;
    let mut m = 0usize;
    while instance.mass(lo, hi) > eps {
        let (x, _) = instance.draw(rng);
        if x < instance.v_star {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        m += 1;
    }
    m
}

pub fn run_threshold_experiment(config: &ThresholdConfig) -> Result<ThresholdReport, TheoryError> {
    if !(config.eps < 1.0) {
        return Err(TheoryError::InvalidParams(format!("eps {} must be below 1", config.eps)));
    }
    if !(config.eps >= MIN_EPS) {
        return Err(TheoryError::EpsTooSmall { eps: config.eps, min: MIN_EPS });
    }
    if config.trials == 0 {
        return Err(TheoryError::InvalidParams("trials must be positive".into()));
    }
    let instance = ThresholdInstance::centered(config.k);
    let params = TctBaseParams { eps_stop: Some(config.eps), max_rounds: 40, ..TctBaseParams::new(config.alpha) };

    let tct: Vec<(usize, usize, f64)> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<_, TheoryError> {
            let rng = trial_stream(config.seed, "threshold/tct", t);
            let mut env = RunEnv::new(CostClock::simulated(0.0), TimeBudget::unlimited(), rng);
            let out = run_tctbase(&instance, &params, &mut env)?;
            let last = out.run.rounds.last().expect("at least one round");
            Ok((out.hypotheses.len(), *out.set_sizes.last().expect("one hypothesis"), last.elapsed))
        })
        .collect::<Result<_, _>>()?;
    let tbatch: Vec<f64> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(config.seed, "threshold/tbatch", t);
            tbatch_stopping_samples(&instance, config.eps, &mut rng) as f64
        })
        .collect();

    let rounds: Vec<f64> = tct.iter().map(|r| r.0 as f64).collect();
    let samples: Vec<f64> = tct.iter().map(|r| r.1 as f64).collect();
    let times: Vec<f64> = tct.iter().map(|r| r.2).collect();
    let tbatch_samples = lower_median(&tbatch) as usize;
    Ok(ThresholdReport {
        config: *config,
        tct_rounds: lower_median(&rounds) as usize,
        tct_samples: lower_median(&samples) as usize,
        tct_log2_samples: samples.iter().map(|s| s.log2()).sum::<f64>() / samples.len() as f64,
        tct_time: lower_median(&times),
        tbatch_samples,
        tbatch_time: instance.cost.train_cost(tbatch_samples),
        eps_exceeds_delta: config.eps > config.delta,
    })
}

/// Growth of the two teachers across a sequence of `eps` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCheck {
    /// Ratio of consecutive median sample counts.
    pub tbatch_ratios: Vec<f64>,
    pub tct_ratios: Vec<f64>,
    /// Residual norm of `log2 tct ~ a + b sqrt(log2 tbatch)`. The fits use
    /// the mean log set size since medians sit on powers of two.
    pub sqrt_log_residual: f64,
    /// Residual norm of `log2 tct ~ a + b log2 tbatch`.
    pub linear_log_residual: f64,
}

pub fn shape_check(reports: &[ThresholdReport]) -> ShapeCheck {
    let ratios =
        |f: &dyn Fn(&ThresholdReport) -> f64| reports.windows(2).map(|w| f(&w[1]) / f(&w[0])).collect::<Vec<_>>();
    let y: Vec<f64> = reports.iter().map(|r| r.tct_log2_samples).collect();
    let lin: Vec<f64> = reports.iter().map(|r| (r.tbatch_samples as f64).log2()).collect();
    let sq: Vec<f64> = lin.iter().map(|v| v.sqrt()).collect();
    ShapeCheck {
        tbatch_ratios: ratios(&|r| r.tbatch_samples as f64),
        tct_ratios: ratios(&|r| r.tct_samples as f64),
        sqrt_log_residual: linear_fit(&sq, &y).2,
        linear_log_residual: linear_fit(&lin, &y).2,
    }
}

/// Per-round shrinkage of the uncertainty interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkRow {
    pub round: usize,
    /// Trials whose error region lay left of `v*` at this round.
    pub left_trials: usize,
    pub left_successes: usize,
    pub right_trials: usize,
    pub right_successes: usize,
    /// `1 - exp(-2^(3i/4))`
    pub bound: f64,
}

impl ShrinkRow {
    pub fn left_frequency(&self) -> f64 {
        self.left_successes as f64 / self.left_trials.max(1) as f64
    }

    pub fn right_frequency(&self) -> f64 {
        self.right_successes as f64 / self.right_trials.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkReport {
    pub alpha: f64,
    pub trials: usize,
    pub rows: Vec<ShrinkRow>,
    /// Rounds where `I_{i+1}` was not inside `I_i` or `E_i` not inside `I_i`.
    pub containment_violations: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct RoundShrink {
    left: Option<bool>,
    right: Option<bool>,
    contained: bool,
}

/// Runs the base teacher for `last_round` rounds and checks, for each round
/// `i` in `first_round..=last_round`, whether the side of the interval
/// holding the error region shrank by `alpha 2^(i/4)`.
pub fn run_shrinkage(
    alpha: f64,
    trials: usize,
    first_round: usize,
    last_round: usize,
    seed: u64,
) -> Result<ShrinkReport, TheoryError> {
    if first_round == 0 || first_round > last_round || trials == 0 {
        return Err(TheoryError::InvalidParams("need 1 <= first_round <= last_round and trials > 0".into()));
    }
    let instance = ThresholdInstance::centered(1);
    // the error region stays resolvable through round 10, so never give up drawing
    let params = TctBaseParams { max_rounds: last_round, draw_limit: u64::MAX, ..TctBaseParams::new(alpha) };

    let per_trial: Vec<Vec<RoundShrink>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<_, TheoryError> {
            let rng = trial_stream(seed, "threshold/shrink", t);
            let mut env = RunEnv::new(CostClock::simulated(0.0), TimeBudget::unlimited(), rng);
            let out = run_tctbase(&instance, &params, &mut env)?;
            let mut rows = Vec::new();
            for (idx, h) in out.hypotheses.iter().enumerate() {
                let round = idx + 1;
                if round > last_round {
                    break;
                }
                let before = instance.uncertainty_interval(&out.samples[..out.set_sizes[idx]]);
                let after_len = out.set_sizes.get(idx + 1).copied().unwrap_or(out.samples.len());
                let after = instance.uncertainty_interval(&out.samples[..after_len]);
                // constant-label sets give an infinite threshold; its error
                // region ends at the support boundary
                let v = h.v.clamp(instance.lo, instance.hi);
                let in_interval = v >= before.lo && v <= before.hi;
                let factor = alpha * 2f64.powf(round as f64 / 4.0);
                let mut row = RoundShrink { contained: before.contains(&after) && in_interval, ..Default::default() };
                if h.v < instance.v_star {
                    row.left = Some(after.left_weight <= before.left_weight / factor);
                } else if h.v > instance.v_star {
                    row.right = Some(after.right_weight <= before.right_weight / factor);
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut containment_violations = 0;
    for trial in &per_trial {
        containment_violations += trial.iter().filter(|r| !r.contained).count();
    }
    for round in first_round..=last_round {
        let mut row = ShrinkRow {
            round,
            left_trials: 0,
            left_successes: 0,
            right_trials: 0,
            right_successes: 0,
            bound: 1.0 - (-(2f64.powf(0.75 * round as f64))).exp(),
        };
        for trial in &per_trial {
            let Some(r) = trial.get(round - 1) else { continue };
            if let Some(ok) = r.left {
                row.left_trials += 1;
                row.left_successes += usize::from(ok);
            }
            if let Some(ok) = r.right {
                row.right_trials += 1;
                row.right_successes += usize::from(ok);
            }
        }
        rows.push(row);
    }
    Ok(ShrinkReport { alpha, trials, rows, containment_violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn error_is_mass_between_thresholds() {
        let inst = ThresholdInstance::centered(1);
        assert_eq!(inst.error_of(0.0), 0.0);
        assert!((inst.error_of(0.25) - 0.25).abs() < 1e-15);
        assert!((inst.error_of(-0.1) - 0.1).abs() < 1e-15);
        assert_eq!(inst.error_of(f64::NEG_INFINITY), 0.5);
        assert_eq!(inst.error_of(f64::INFINITY), 0.5);
    }

    #[test]
    fn interval_brackets_v_star() {
        let inst = ThresholdInstance::centered(1);
        let i = inst.uncertainty_interval(&[(-0.2, -1), (0.1, 1), (-0.3, -1), (0.4, 1)]);
        assert_eq!((i.lo, i.hi), (-0.2, 0.1));
        assert!((i.left_weight - 0.2).abs() < 1e-15);
        assert!((i.right_weight - 0.1).abs() < 1e-15);
    }

    #[test]
    fn tbatch_at_half_needs_a_couple_of_samples() {
        // two samples suffice iff they fall on opposite sides with gaps
        // summing to at most 1/2: probability 1/2 * 1/2 = 1/4
        let inst = ThresholdInstance::centered(1);
        let mut rng = substream(11, "tbatch-half");
        let n = 20_000;
        let counts: Vec<f64> = (0..n).map(|_| tbatch_stopping_samples(&inst, 0.5, &mut rng) as f64).collect();
        let at_most_two = counts.iter().filter(|&&c| c <= 2.0).count() as f64 / n as f64;
        assert!((at_most_two - 0.25).abs() < 0.015, "P(m <= 2) = {at_most_two}");
        assert!(counts.iter().all(|&c| c >= 2.0));
        // P(m <= 3) is within a hair of 1/2, so the median sits at 3 or 4
        let median = lower_median(&counts);
        assert!((3.0..=4.0).contains(&median), "median {median}");
    }

    #[test]
    fn tiny_eps_is_rejected() {
        let cfg = ThresholdConfig::new(1e-300, 0.5, 1);
        assert!(matches!(run_threshold_experiment(&cfg), Err(TheoryError::EpsTooSmall { .. })));
    }
}

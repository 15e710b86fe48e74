//! A six-point instance where a large wrong-example share steers ERM away
//! from the best hypothesis.
//!
//! Points 1..6 (stored as 0..5), odd points weigh 2/9 and even points 1/9,
//! and the target labels exactly the odd points positive. The class holds
//! `h1 = {1,2,3,4}`, `h2 = {1,2,5,6}`, `h3 = {3,4,5,6}` and `hbar = {1..6}`
//! (each set is the hypothesis's positive points). `hbar` has error 1/3,
//! the others 4/9; but `hbar`'s mistakes are the even points, which wrong
//! sampling floods the training set with.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::finite::FiniteInstance;
use super::TheoryError;
use crate::clock::{CostClock, CostModel, TimeBudget};
use crate::learners::finite::FiniteHypothesisClass;
use crate::rng::trial_stream;
use crate::teachers::{run_tctbase, CountRounding, RunEnv, TctBaseParams};

/// Index of `hbar` in [`bad_example_class`].
pub const HBAR: usize = 3;

pub fn bad_example_class() -> FiniteHypothesisClass {
    FiniteHypothesisClass::from_positive_sets(
        6,
        &[("h1", &[0, 1, 2, 3]), ("h2", &[0, 1, 4, 5]), ("h3", &[2, 3, 4, 5]), ("hbar", &[0, 1, 2, 3, 4, 5])],
    )
    .expect("well-formed class")
}

pub fn bad_example_target() -> Vec<i8> {
    vec![1, -1, 1, -1, 1, -1]
}

pub fn bad_example_weights() -> Vec<Rational64> {
    (0..6).map(|p| if p % 2 == 0 { Rational64::new(2, 9) } else { Rational64::new(1, 9) }).collect()
}

/// Exact error of every hypothesis.
pub fn bad_example_exact_errors() -> Vec<Rational64> {
    let class = bad_example_class();
    let target = bad_example_target();
    let weights = bad_example_weights();
    (0..class.len())
        .map(|h| {
            (0..6)
                .filter(|&p| class.label(h, p) != target[p])
                .map(|p| weights[p])
                .fold(Rational64::new(0, 1), |a, b| a + b)
        })
        .collect()
}

pub fn bad_example_instance() -> FiniteInstance {
    let weights = bad_example_weights().iter().map(|w| *w.numer() as f64 / *w.denom() as f64).collect();
    FiniteInstance::new(bad_example_class(), bad_example_target(), weights, CostModel::default())
        .expect("valid instance")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadExampleReport {
    pub trials: usize,
    pub rounds: usize,
    pub alpha: f64,
    pub rounding: CountRounding,
    /// Trials where the teacher's hypothesis was `hbar` in some round.
    pub tct_successes: usize,
    pub tct_success_rate: f64,
    pub tbatch_samples: usize,
    /// Trials where ERM on `tbatch_samples` random samples returned `hbar`.
    pub tbatch_successes: usize,
    pub tbatch_success_rate: f64,
}

pub const TBATCH_CONTROL_SAMPLES: usize = 1000;

/// Floor rounding of `alpha 2^i` starves the first rounds of wrong samples
/// (1, 3, 7 instead of 2, 4, 7 at `alpha = 0.9`), which roughly doubles the
/// success rate; [`CountRounding::Nearest`] tracks the real-valued schedule.
pub fn run_bad_example(
    trials: usize,
    rounds: usize,
    alpha: f64,
    rounding: CountRounding,
    seed: u64,
) -> Result<BadExampleReport, TheoryError> {
    if trials == 0 || rounds == 0 {
        return Err(TheoryError::InvalidParams("trials and rounds must be positive".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(TheoryError::InvalidParams(format!("alpha {alpha} outside [0, 1)")));
    }
    let instance = bad_example_instance();
    let params = TctBaseParams { max_rounds: rounds, rounding, ..TctBaseParams::new(alpha) };

    let tct: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool, TheoryError> {
            let mut env = RunEnv::new(
                CostClock::simulated(0.0),
                TimeBudget::unlimited(),
                trial_stream(seed, "bad_example/tct", t),
            );
            let out = run_tctbase(&instance, &params, &mut env)?;
            Ok(out.hypotheses.contains(&HBAR))
        })
        .collect::<Result<_, _>>()?;
    let tbatch: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_stream(seed, "bad_example/tbatch", t);
            let samples: Vec<usize> = (0..TBATCH_CONTROL_SAMPLES).map(|_| instance.draw_point(&mut rng)).collect();
            instance.erm(&samples) == HBAR
        })
        .collect();

    let tct_successes = tct.iter().filter(|&&s| s).count();
    let tbatch_successes = tbatch.iter().filter(|&&s| s).count();
    Ok(BadExampleReport {
        trials,
        rounds,
        alpha,
        rounding,
        tct_successes,
        tct_success_rate: tct_successes as f64 / trials as f64,
        tbatch_samples: TBATCH_CONTROL_SAMPLES,
        tbatch_successes,
        tbatch_success_rate: tbatch_successes as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_errors_are_one_third_and_four_ninths() {
        let e = bad_example_exact_errors();
        assert_eq!(e[HBAR], Rational64::new(1, 3));
        for err in &e[..3] {
            assert_eq!(*err, Rational64::new(4, 9));
        }
        let total = bad_example_weights().into_iter().fold(Rational64::new(0, 1), |a, b| a + b);
        assert_eq!(total, Rational64::new(1, 1));
    }

    #[test]
    fn hbar_on_one_of_each_point() {
        let class = bad_example_class();
        let target = bad_example_target();
        // hbar labels everything +1, so it is right exactly on the odd points
        let correct = (0..6).filter(|&p| class.label(HBAR, p) == target[p]).count();
        assert_eq!(correct as f64 / 6.0, 0.5);
    }
}

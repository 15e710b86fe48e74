//! The analyzable base teacher for an unlimited sample source: start from
//! one example; round `i` adds `2^i` examples of which `floor(alpha 2^i)`
//! are rejection-sampled mistakes of the current hypothesis.

use serde::{Deserialize, Serialize};

use super::{floor_count, RunEnv, TeacherError};
use crate::clock::CostModel;
use crate::rng::StreamRng;
use crate::trace::{RoundRecord, StopReason, TeacherRun};

/// Outcome of looking for a misclassified sample.
#[derive(Debug, Clone, PartialEq)]
pub enum WrongDraw<S> {
    Found {
        sample: S,
        draws: u64,
    },
    /// `draws` consecutive samples were all classified correctly.
    Exhausted {
        draws: u64,
    },
}

/// A sample source together with an ERM learner over it.
pub trait TeachingInstance: Sync {
    type Sample: Clone + Send;
    type Hypothesis: Clone + Send;

    fn name(&self) -> &str;

    fn cost_model(&self) -> CostModel;

    fn draw(&self, rng: &mut StreamRng) -> Self::Sample;

    fn train(&self, samples: &[Self::Sample]) -> Self::Hypothesis;

    fn is_wrong(&self, h: &Self::Hypothesis, sample: &Self::Sample) -> bool;

    /// Draws until `h` misclassifies a sample, giving up after `limit`
    /// draws. Implementations with a known error region may sample it
    /// directly, as long as the result has the same distribution.
    fn draw_wrong(&self, h: &Self::Hypothesis, rng: &mut StreamRng, limit: u64) -> WrongDraw<Self::Sample> {
        for draws in 1..=limit {
            let s = self.draw(rng);
            if self.is_wrong(h, &s) {
                return WrongDraw::Found { sample: s, draws };
            }
        }
        WrongDraw::Exhausted { draws: limit }
    }

    /// Exact error under the source distribution, when it has a closed form.
    fn true_error(&self, _h: &Self::Hypothesis) -> Option<f64> {
        None
    }
}

/// How the fractional wrong-sample count `alpha 2^i` becomes an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountRounding {
    #[default]
    Floor,
    Nearest,
}

impl CountRounding {
    pub fn apply(self, x: f64) -> usize {
        match self {
            CountRounding::Floor => floor_count(x),
            CountRounding::Nearest => floor_count(x + 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TctBaseParams {
    pub alpha: f64,
    /// Stop once the hypothesis error is at most this.
    pub eps_stop: Option<f64>,
    /// Number of sampling rounds; the last set has `2^(max_rounds+1) - 1`
    /// examples.
    pub max_rounds: usize,
    /// Consecutive correct draws after which wrong samples are deemed absent.
    pub draw_limit: u64,
    /// Sample size for estimating error when no closed form exists.
    pub probe_size: usize,
    pub rounding: CountRounding,
}

impl TctBaseParams {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            eps_stop: None,
            max_rounds: 40,
            draw_limit: 1_000_000,
            probe_size: 10_000,
            rounding: CountRounding::Floor,
        }
    }
}

pub struct TctBaseOutcome<I: TeachingInstance> {
    pub run: TeacherRun,
    /// Every sample in the order added; round `r`'s set is a prefix.
    pub samples: Vec<I::Sample>,
    /// Hypotheses finished within the budget, in round order.
    pub hypotheses: Vec<I::Hypothesis>,
    /// Training-set size behind each entry of `hypotheses`.
    pub set_sizes: Vec<usize>,
    /// Error of each entry of `hypotheses`.
    pub errors: Vec<f64>,
    /// Unbiased samples in each training set.
    pub unbiased: Vec<usize>,
}

impl<I: TeachingInstance> TctBaseOutcome<I> {
    pub fn returned(&self) -> Option<&I::Hypothesis> {
        self.hypotheses.last()
    }

    pub fn returned_error(&self) -> Option<f64> {
        self.errors.last().copied()
    }
}

fn estimate_error<I: TeachingInstance>(instance: &I, h: &I::Hypothesis, n: usize, rng: &mut StreamRng) -> f64 {
    let wrong = (0..n).filter(|_| instance.is_wrong(h, &instance.draw(rng))).count();
    wrong as f64 / n.max(1) as f64
}

pub fn run_tctbase<I: TeachingInstance>(
    instance: &I,
    params: &TctBaseParams,
    env: &mut RunEnv,
) -> Result<TctBaseOutcome<I>, TeacherError> {
    // alpha = 0 is the all-random schedule, kept as a control
    if !(0.0..1.0).contains(&params.alpha) {
        return Err(TeacherError::InvalidParams(format!("alpha {} outside [0, 1)", params.alpha)));
    }
    if params.max_rounds >= 60 {
        return Err(TeacherError::InvalidParams("max_rounds must be below 60".into()));
    }
    let limit = env.limit();
    let mut out = TctBaseOutcome {
        run: TeacherRun::new("tctbase", instance.name(), serde_json::to_value(params).unwrap_or_default()),
        samples: vec![instance.draw(&mut env.rng)],
        hypotheses: Vec::new(),
        set_sizes: Vec::new(),
        errors: Vec::new(),
        unbiased: Vec::new(),
    };
    let mut unbiased = 1usize;

    for round in 1.. {
        let h = instance.train(&out.samples);
        env.clock.charge_training(out.samples.len(), instance.cost_model());
        let elapsed = env.elapsed();
        let train_size = out.samples.len();
        if elapsed > limit {
            out.run.rounds.push(RoundRecord { round, train_size, set_size: train_size, elapsed, ..Default::default() });
            out.run.stop = StopReason::Budget;
            break;
        }
        let error = match instance.true_error(&h) {
            Some(e) => e,
            None => {
                let n = params.probe_size;
                estimate_error(instance, &h, n, &mut env.rng)
            }
        };
        out.hypotheses.push(h.clone());
        out.set_sizes.push(train_size);
        out.errors.push(error);
        out.unbiased.push(unbiased);
        out.run.returned_round = Some(round);
        let mut record = RoundRecord {
            round,
            train_size,
            set_size: train_size,
            elapsed,
            is_best: true,
            test_accuracy: Some(1.0 - error),
            ..Default::default()
        };

        if params.eps_stop.is_some_and(|eps| error <= eps) {
            out.run.rounds.push(record);
            out.run.stop = StopReason::EarlyStop;
            break;
        }
        if round > params.max_rounds {
            out.run.rounds.push(record);
            out.run.stop = StopReason::MaxRounds;
            break;
        }

        let n = 1usize << round;
        let n_wrong = params.rounding.apply(params.alpha * n as f64).min(n);
        let n_random = n - n_wrong;
        out.samples.extend((0..n_random).map(|_| instance.draw(&mut env.rng)));
        unbiased += n_random;
        let mut draws = 0u64;
        let mut exhausted = false;
        let mut found = 0usize;
        for _ in 0..n_wrong {
            match instance.draw_wrong(&h, &mut env.rng, params.draw_limit) {
                WrongDraw::Found { sample, draws: d } => {
                    draws += d;
                    found += 1;
                    out.samples.push(sample);
                }
                WrongDraw::Exhausted { draws: d } => {
                    draws += d;
                    exhausted = true;
                    break;
                }
            }
        }
        env.clock.charge_classification(usize::try_from(draws).unwrap_or(usize::MAX));
        record.random_added = n_random;
        record.targeted_added = found;
        record.wrong_added = found;
        record.rejection_draws = draws;
        record.set_size = out.samples.len();
        record.shortfall = n - n_random - found;
        out.run.rounds.push(record);
        if exhausted {
            out.run.events.push(format!("round {round}: no wrong sample within {} draws", params.draw_limit));
            out.run.stop = StopReason::EarlyStop;
            break;
        }
    }
    if out.hypotheses.is_empty() {
        out.run.stop = StopReason::NoModel;
        out.run.returned_round = None;
    }
    Ok(out)
}

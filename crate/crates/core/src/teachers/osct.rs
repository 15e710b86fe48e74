//! Online-set-cover teacher: multiplicative weights over the pool, doubled
//! on the current model's mistakes, with examples sent in proportion to the
//! weight increase.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{RunEnv, TeacherError};
use crate::domain::ExamplePool;
use crate::model::{classify_and_split, Learner};
use crate::stats::{ci_lower, AccuracyEstimate, Z_95};
use crate::trace::{OsctAttempt, OsctRound, RoundRecord, StopReason, TeacherRun};

/// Initial guess for the effective number of hypotheses `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum NGuessRule {
    Fixed {
        n: f64,
    },
    /// `N = 2^(fraction * m)` for a pool of `m` examples.
    ExpFraction {
        fraction: f64,
    },
}

impl NGuessRule {
    fn log2_n(self, m: usize) -> f64 {
        match self {
            NGuessRule::Fixed { n } => n.log2(),
            NGuessRule::ExpFraction { fraction } => fraction * m as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OsctParams {
    pub n_guess: NGuessRule,
    /// Return the model with the best confidence bound on the pool instead
    /// of the last one built in time.
    pub save_best: bool,
    /// Random examples sent before the first model is trained.
    pub m0: usize,
}

impl OsctParams {
    pub fn new(m0: usize) -> Self {
        Self { n_guess: NGuessRule::Fixed { n: 2.0 }, save_best: false, m0 }
    }

    pub fn exp_fraction(m0: usize) -> Self {
        Self { n_guess: NGuessRule::ExpFraction { fraction: 0.005 }, ..Self::new(m0) }
    }

    pub fn saving_best(mut self) -> Self {
        self.save_best = true;
        self
    }
}

/// Sampling repetitions per attempt: `ceil(4 log2 N)`.
pub fn repetitions(log2_n: f64) -> usize {
    (4.0 * log2_n).ceil().max(1.0) as usize
}

/// Result of doubling the weights on the wrong set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightUpdate {
    pub doublings: u32,
    pub mass_before: f64,
    pub mass_after: f64,
    /// `W^t_e - W^{t-1}_e` for each wrong example, in input order.
    pub increments: Vec<f64>,
}

/// Multiplies the weights of `wrong` by `2^l` for the smallest `l >= 0`
/// making their total at least 1.
pub fn double_wrong_weights(weights: &mut [f64], wrong: &[usize]) -> WeightUpdate {
    let mass_before: f64 = wrong.iter().map(|&e| weights[e]).sum();
    assert!(mass_before > 0.0, "wrong set must carry positive weight");
    let mut doublings = 0u32;
    let mut factor = 1.0;
    while mass_before * factor < 1.0 {
        doublings += 1;
        factor *= 2.0;
    }
    let increments = wrong
        .iter()
        .map(|&e| {
            let old = weights[e];
            weights[e] = old * factor;
            weights[e] - old
        })
        .collect();
    WeightUpdate { doublings, mass_before, mass_after: mass_before * factor, increments }
}

/// Above this many repetitions an attempt is abandoned.
const MAX_REPETITIONS: usize = 1 << 24;

pub fn run_osct(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    params: &OsctParams,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    let m = pool.len();
    let initial_log2_n = params.n_guess.log2_n(m);
    if !(initial_log2_n >= 1.0) {
        return Err(TeacherError::InvalidParams("the guess N must be at least 2".into()));
    }
    if params.m0 == 0 {
        return Err(TeacherError::InvalidParams("m0 must be at least 1".into()));
    }
    if m < params.m0 {
        return Err(TeacherError::NotEnoughExamples { needed: params.m0, available: m });
    }
    let n_classes = pool.n_classes();
    let limit = env.limit();
    let name = if params.save_best { "osct_best" } else { "osct" };
    let mut run = TeacherRun::new(name, learner.name(), serde_json::to_value(params).unwrap_or_default());

    let first = pool.sample_unseen(params.m0)?;
    pool.commit(&first.indices);
    pool.release_in_flight();
    let mut sent: Vec<usize> = first.indices;
    let mut in_sent = vec![false; m];
    for &e in &sent {
        in_sent[e] = true;
    }
    let base_weight = 1.0 / (2.0 * m as f64);
    let mut weights = vec![base_weight; m];
    let mut log2_n = initial_log2_n;
    let mut best_ci: Option<f64> = None;
    let everything: Vec<usize> = (0..m).collect();

    for round in 0.. {
        let train_size = sent.len();
        let model = {
            let train = pool.gather(&sent);
            env.train(learner, &train, n_classes)?
        };
        let split =
            classify_and_split(&*model, &everything, |e| pool.example(e), &mut env.clock).expect("non-empty pool");
        let ci = ci_lower(AccuracyEstimate::new(split.accuracy, m), Z_95);
        let elapsed = env.elapsed();
        let is_best = elapsed <= limit && (!params.save_best || best_ci.is_none_or(|b| ci > b));
        let test_accuracy = env.evaluate(&*model);
        if is_best {
            best_ci = Some(ci);
            run.returned_round = Some(round);
            run.returned_model = Some(model.clone());
        }
        let mut record = RoundRecord {
            round,
            train_size,
            set_size: train_size,
            acc1: Some(split.accuracy),
            n1: m,
            pooled_acc: Some(split.accuracy),
            ci_lower: Some(ci),
            elapsed,
            is_best,
            test_accuracy,
            ..Default::default()
        };
        let mut osct = OsctRound { wrong_count: split.wrong.len(), attempts: Vec::new() };

        if split.wrong.is_empty() {
            record.osct = Some(osct);
            run.rounds.push(record);
            run.stop = StopReason::Consistent;
            break;
        }

        let mut new_examples = 0usize;
        let mut abandoned = false;
        loop {
            let update = double_wrong_weights(&mut weights, &split.wrong);
            let reps = repetitions(log2_n);
            if reps > MAX_REPETITIONS {
                abandoned = true;
                break;
            }
            let mut cumulative = Vec::with_capacity(update.increments.len());
            let mut acc = 0.0;
            for d in &update.increments {
                acc += d;
                cumulative.push(acc);
            }
            // sum of increments above 1 cannot be a sub-probability; rescale
            let scale = if acc > 1.0 { acc } else { 1.0 };
            let mut selected = 0usize;
            let mut sent_now = 0usize;
            for _ in 0..reps {
                let u: f64 = env.rng.random::<f64>() * scale;
                let pos = cumulative.partition_point(|&c| c <= u);
                if pos < cumulative.len() {
                    selected += 1;
                    let e = split.wrong[pos];
                    if !in_sent[e] {
                        in_sent[e] = true;
                        sent.push(e);
                        sent_now += 1;
                    }
                }
            }
            osct.attempts.push(OsctAttempt {
                log2_n,
                doublings: update.doublings,
                wrong_mass_before: update.mass_before,
                wrong_mass_after: update.mass_after,
                repetitions: reps,
                selected,
                sent: sent_now,
            });
            new_examples += sent_now;
            if selected > 0 {
                break;
            }
            log2_n *= 2.0;
            weights.fill(base_weight);
        }
        pool.commit(&sent[train_size..]);
        pool.release_in_flight();
        record.set_size = sent.len();
        record.targeted_added = new_examples;
        record.wrong_added = new_examples;
        record.osct = Some(osct);
        run.rounds.push(record);

        if abandoned {
            run.events.push(format!("round {round}: guess for N grew past the repetition limit"));
            run.stop = StopReason::EarlyStop;
            break;
        }
        if elapsed >= limit {
            run.stop = StopReason::Budget;
            break;
        }
    }
    if run.returned_model.is_none() {
        run.stop = StopReason::NoModel;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_rule_worked_example() {
        let mut w = vec![1.0 / 20.0; 10];
        let u = double_wrong_weights(&mut w, &[0, 3, 5, 9]);
        // oracle: smallest l with 0.2 * 2^l >= 1 is 3
        assert_eq!(u.doublings, 3);
        assert!((u.mass_after - 1.6).abs() < 1e-12);
        for d in &u.increments {
            assert!((d - 0.35).abs() < 1e-12);
        }
        assert!((w[3] - 0.4).abs() < 1e-12);
        assert_eq!(w[1], 0.05);
    }

    #[test]
    fn heavy_wrong_set_is_not_doubled() {
        let mut w = vec![0.6, 0.6, 0.1];
        let u = double_wrong_weights(&mut w, &[0, 1]);
        assert_eq!(u.doublings, 0);
        assert!(u.increments.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn repetition_counts() {
        assert_eq!(repetitions(1.0), 4);
        assert_eq!(repetitions(2.0), 8);
        assert_eq!(repetitions(0.005 * 1000.0), 20);
        assert_eq!(repetitions(1.1), 5);
    }
}

//! The time-constrained teacher: each round doubles the training set with a
//! mix of random examples and examples the current model gets wrong, and the
//! model with the best confidence lower bound is kept.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{floor_count, RunEnv, TeacherError};
use crate::domain::{Draw, ExamplePool, PoolError};
use crate::model::{classify_and_split, Learner};
use crate::stats::{ci_lower, pooled_accuracy, AccuracyEstimate, Z_95};
use crate::trace::{RoundRecord, StopReason, TeacherRun};

/// How the wrong-example share is chosen each round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AlphaRule {
    Fixed {
        alpha: f64,
    },
    /// `alpha = 1 - acc1`, recomputed every round.
    OneMinusAcc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TctParams {
    pub m0: usize,
    pub alpha: AlphaRule,
    /// Largest `|A2|` as a multiple of `|S|`.
    pub a2_cap: f64,
    pub z: f64,
}

impl TctParams {
    pub fn new(m0: usize, alpha: f64) -> Self {
        Self { m0, alpha: AlphaRule::Fixed { alpha }, a2_cap: 9.0, z: Z_95 }
    }

    pub fn dynamic(m0: usize) -> Self {
        Self { alpha: AlphaRule::OneMinusAcc, ..Self::new(m0, 0.0) }
    }

    fn validate(&self) -> Result<(), TeacherError> {
        if self.m0 == 0 {
            return Err(TeacherError::InvalidParams("m0 must be at least 1".into()));
        }
        if let AlphaRule::Fixed { alpha } = self.alpha {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(TeacherError::InvalidParams(format!("alpha {alpha} outside [0, 1]")));
            }
        }
        if !(self.a2_cap > 0.0) {
            return Err(TeacherError::InvalidParams("a2_cap must be positive".into()));
        }
        Ok(())
    }
}

/// Size of the second test batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct A2Request {
    pub size: usize,
    /// Size before the cap.
    pub requested: u64,
    pub capped: bool,
}

/// `|A2| = floor(alpha |S| acc1 / (1 - acc1))`, capped at `a2_cap |S|`.
/// A perfect first batch skips `A2`. Under the `1 - acc1` rule this is
/// `floor(|S| acc1)` and no cap applies.
pub fn a2_request(set_size: usize, acc1: f64, rule: AlphaRule, a2_cap: f64) -> A2Request {
    if acc1 >= 1.0 {
        return A2Request { size: 0, requested: 0, capped: false };
    }
    let s = set_size as f64;
    match rule {
        AlphaRule::OneMinusAcc => {
            let size = floor_count(s * acc1);
            A2Request { size, requested: size as u64, capped: false }
        }
        AlphaRule::Fixed { alpha } => {
            let raw = floor_count(alpha * s * acc1 / (1.0 - acc1));
            let cap = floor_count(a2_cap * s);
            if raw > cap {
                A2Request { size: cap, requested: raw as u64, capped: true }
            } else {
                A2Request { size: raw, requested: raw as u64, capped: false }
            }
        }
    }
}

/// Draws up to `n` examples; an exhausted pool yields an empty draw.
pub(crate) fn draw_or_empty(pool: &mut ExamplePool, n: usize) -> Result<Draw, TeacherError> {
    match pool.sample_unseen(n) {
        Ok(d) => Ok(d),
        Err(PoolError::PoolExhausted) => Ok(Draw::default()),
        Err(e) => Err(e.into()),
    }
}

pub fn run_tct(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    params: &TctParams,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    params.validate()?;
    let name = match params.alpha {
        AlphaRule::Fixed { .. } => "tct",
        AlphaRule::OneMinusAcc => "tct_dynamic",
    };
    if pool.len() < params.m0 {
        return Err(TeacherError::NotEnoughExamples { needed: params.m0, available: pool.len() });
    }
    let n_classes = pool.n_classes();
    let limit = env.limit();
    let mut run = TeacherRun::new(name, learner.name(), serde_json::to_value(params).unwrap_or_default());

    let first = pool.sample_unseen(params.m0)?;
    pool.commit(&first.indices);
    pool.release_in_flight();
    let mut set: Vec<usize> = first.indices;
    let mut best_ci: Option<f64> = None;
    let mut fallback_noted = false;

    for round in 0.. {
        let set_size = set.len();
        let model = {
            let train = pool.gather(&set);
            env.train(learner, &train, n_classes)?
        };

        let a1 = draw_or_empty(pool, set_size)?;
        if a1.is_empty() {
            // nothing left to score or add: keep this model only if nothing better exists
            let elapsed = env.elapsed();
            let is_best = best_ci.is_none() && elapsed <= limit;
            let test_accuracy = env.evaluate(&*model);
            if is_best {
                run.returned_round = Some(round);
                run.returned_model = Some(model);
            }
            run.rounds.push(RoundRecord {
                round,
                train_size: set_size,
                set_size,
                elapsed,
                is_best,
                test_accuracy,
                ..Default::default()
            });
            run.events.push(format!("round {round}: pool exhausted"));
            run.stop = StopReason::PoolExhausted;
            break;
        }
        let split1 = classify_and_split(
            &*model,
            &(0..a1.len()).collect::<Vec<_>>(),
            |p| pool.example(a1.indices[p]),
            &mut env.clock,
        )
        .expect("non-empty batch");
        let acc1 = split1.accuracy;

        let request = a2_request(set_size, acc1, params.alpha, params.a2_cap);
        let a2 = draw_or_empty(pool, request.size)?;
        let split2 = if a2.is_empty() {
            None
        } else {
            Some(
                classify_and_split(
                    &*model,
                    &(0..a2.len()).collect::<Vec<_>>(),
                    |p| pool.example(a2.indices[p]),
                    &mut env.clock,
                )
                .expect("non-empty batch"),
            )
        };
        let acc2 = split2.as_ref().map(|s| s.accuracy);

        let pooled = pooled_accuracy(
            AccuracyEstimate::new(acc1, a1.len()),
            AccuracyEstimate::new(acc2.unwrap_or(0.0), a2.len()),
        );
        let ci = ci_lower(pooled, params.z);
        let elapsed = env.elapsed();
        let is_best = elapsed <= limit && best_ci.is_none_or(|b| ci > b);
        let test_accuracy = env.evaluate(&*model);
        if is_best {
            best_ci = Some(ci);
            run.returned_round = Some(round);
            run.returned_model = Some(model.clone());
        }

        // U: (1 - alpha)|S| uniformly random members of A1
        let alpha = match params.alpha {
            AlphaRule::Fixed { alpha } => alpha,
            AlphaRule::OneMinusAcc => 1.0 - acc1,
        };
        let n_w = floor_count(alpha * set_size as f64).min(set_size);
        let n_u = (set_size - n_w).min(a1.len());
        let mut positions: Vec<usize> = (0..a1.len()).collect();
        positions.partial_shuffle(&mut env.rng, n_u);
        let mut in_u = vec![false; a1.len()];
        for &p in &positions[..n_u] {
            in_u[p] = true;
        }
        let mut wrong1 = vec![false; a1.len()];
        for &p in &split1.wrong {
            wrong1[p] = true;
        }

        // V: wrong before correct; A2 before the rest of A1 within each group
        let mut v: Vec<(usize, bool)> = Vec::with_capacity(a2.len() + a1.len() - n_u);
        if let Some(s2) = &split2 {
            v.extend(s2.wrong.iter().map(|&p| (a2.indices[p], true)));
        }
        v.extend((0..a1.len()).filter(|&p| !in_u[p] && wrong1[p]).map(|p| (a1.indices[p], true)));
        if let Some(s2) = &split2 {
            v.extend(s2.correct.iter().map(|&p| (a2.indices[p], false)));
        }
        v.extend((0..a1.len()).filter(|&p| !in_u[p] && !wrong1[p]).map(|p| (a1.indices[p], false)));
        let w = &v[..n_w.min(v.len())];

        let u: Vec<usize> = (0..a1.len()).filter(|&p| in_u[p]).map(|p| a1.indices[p]).collect();
        let targeted_wrong = w.iter().filter(|x| x.1).count();
        let candidates_wrong = v.iter().filter(|x| x.1).count();
        let wrong_added = (0..a1.len()).filter(|&p| in_u[p] && wrong1[p]).count() + targeted_wrong;
        let added = u.len() + w.len();
        pool.commit(&u);
        let w_idx: Vec<usize> = w.iter().map(|x| x.0).collect();
        pool.commit(&w_idx);
        pool.release_in_flight();
        set.extend_from_slice(&u);
        set.extend_from_slice(&w_idx);

        let fallback = a1.from_fallback + a2.from_fallback > 0;
        if fallback && !fallback_noted {
            fallback_noted = true;
            run.events.push(format!("round {round}: drawing from examples never added to the training set"));
        }
        if request.capped {
            run.events.push(format!("round {round}: |A2| capped from {} to {}", request.requested, request.size));
        }
        run.rounds.push(RoundRecord {
            round,
            train_size: set_size,
            set_size: set.len(),
            random_added: u.len(),
            targeted_added: w.len(),
            wrong_added,
            targeted_wrong,
            candidates_wrong,
            acc1: Some(acc1),
            n1: a1.len(),
            acc2,
            n2: a2.len(),
            pooled_acc: Some(pooled.acc),
            ci_lower: Some(ci),
            a2_requested: request.capped.then_some(request.requested),
            a2_capped: request.capped,
            fallback,
            shortfall: set_size - added,
            elapsed,
            is_best,
            test_accuracy,
            ..Default::default()
        });

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

/// TCT with `alpha = 1 - acc1` chosen afresh each round.
pub fn run_dynamic_tct(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    m0: usize,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    run_tct(learner, pool, &TctParams::dynamic(m0), env)
}

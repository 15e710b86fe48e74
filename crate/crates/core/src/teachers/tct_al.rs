//! TCT with uncertainty sampling: each round scores `2|S|` fresh examples and
//! adds the ones the model is least sure about plus random ones.

use rand::seq::SliceRandom;

use super::tct::draw_or_empty;
use super::{floor_count, RunEnv, TeacherError};
use crate::domain::ExamplePool;
use crate::model::{argmax, Learner};
use crate::stats::{ci_lower_95, AccuracyEstimate};
use crate::trace::{RoundRecord, StopReason, TeacherRun};

/// Gap between the two largest probabilities; smaller means less certain.
pub fn top_two_gap(probs: &[f64]) -> f64 {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &p in probs {
        if p > first {
            second = first;
            first = p;
        } else if p > second {
            second = p;
        }
    }
    if second == f64::NEG_INFINITY {
        return first;
    }
    first - second
}

/// Positions of `gaps` sorted by increasing gap; ties keep input order.
pub fn uncertainty_order(gaps: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&a, &b| gaps[a].total_cmp(&gaps[b]));
    order
}

pub fn run_tct_al(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    m0: usize,
    alpha: f64,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    if !learner.supports_probabilities() {
        return Err(TeacherError::UnsupportedLearner(learner.name().to_string()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TeacherError::InvalidParams(format!("alpha {alpha} outside [0, 1]")));
    }
    if m0 == 0 {
        return Err(TeacherError::InvalidParams("m0 must be at least 1".into()));
    }
    if pool.len() < m0 {
        return Err(TeacherError::NotEnoughExamples { needed: m0, available: pool.len() });
    }
    let n_classes = pool.n_classes();
    let limit = env.limit();
    let mut run = TeacherRun::new("tct_al", learner.name(), serde_json::json!({ "m0": m0, "alpha": alpha }));

    let first = pool.sample_unseen(m0)?;
    pool.commit(&first.indices);
    pool.release_in_flight();
    let mut set = first.indices;
    let mut best_ci: Option<f64> = None;

    for round in 0.. {
        let i = set.len();
        let model = {
            let train = pool.gather(&set);
            env.train(learner, &train, n_classes)?
        };
        let batch = draw_or_empty(pool, 2 * i)?;
        if batch.is_empty() {
            run.events.push(format!("round {round}: pool exhausted"));
            run.stop = StopReason::PoolExhausted;
            break;
        }
        env.clock.charge_classification(batch.len());
        let mut gaps = Vec::with_capacity(batch.len());
        let mut correct = 0usize;
        let mut wrong = vec![false; batch.len()];
        for (p, &e) in batch.indices.iter().enumerate() {
            let ex = pool.example(e);
            let probs = model
                .predict_proba(&ex.features)
                .ok_or_else(|| TeacherError::UnsupportedLearner(learner.name().to_string()))?;
            if argmax(&probs) == ex.label {
                correct += 1;
            } else {
                wrong[p] = true;
            }
            gaps.push(top_two_gap(&probs));
        }
        let estimate = AccuracyEstimate::from_counts(correct, batch.len());
        let ci = ci_lower_95(estimate);
        let elapsed = env.elapsed();
        let is_best = elapsed <= limit && best_ci.is_none_or(|b| ci > b);
        let test_accuracy = env.evaluate(&*model);
        if is_best {
            best_ci = Some(ci);
            run.returned_round = Some(round);
            run.returned_model = Some(model);
        }

        let order = uncertainty_order(&gaps);
        let n_unc = floor_count(alpha * i as f64).min(order.len());
        let mut rest: Vec<usize> = order[n_unc..].to_vec();
        rest.sort_unstable();
        let n_rand = (i - floor_count(alpha * i as f64).min(i)).min(rest.len());
        rest.partial_shuffle(&mut env.rng, n_rand);
        let chosen: Vec<usize> = order[..n_unc].iter().chain(&rest[..n_rand]).copied().collect();
        let added: Vec<usize> = chosen.iter().map(|&p| batch.indices[p]).collect();
        pool.commit(&added);
        pool.release_in_flight();
        set.extend_from_slice(&added);

        run.rounds.push(RoundRecord {
            round,
            train_size: i,
            set_size: set.len(),
            random_added: n_rand,
            targeted_added: n_unc,
            wrong_added: chosen.iter().filter(|&&p| wrong[p]).count(),
            acc1: Some(estimate.acc),
            n1: batch.len(),
            pooled_acc: Some(estimate.acc),
            ci_lower: Some(ci),
            fallback: batch.from_fallback > 0,
            shortfall: i - added.len(),
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

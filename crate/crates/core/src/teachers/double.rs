//! Sends `m0 * 2^i` fresh random examples in round `i` and retrains on
//! everything received; returns the last model finished within the budget.

use super::tct::draw_or_empty;
use super::{RunEnv, TeacherError};
use crate::domain::ExamplePool;
use crate::model::Learner;
use crate::trace::{RoundRecord, StopReason, TeacherRun};

pub fn run_double(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    m0: usize,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    if m0 == 0 {
        return Err(TeacherError::InvalidParams("m0 must be at least 1".into()));
    }
    if pool.len() < m0 {
        return Err(TeacherError::NotEnoughExamples { needed: m0, available: pool.len() });
    }
    let n_classes = pool.n_classes();
    let limit = env.limit();
    let mut run = TeacherRun::new("double", learner.name(), serde_json::json!({ "m0": m0 }));
    let mut set: Vec<usize> = Vec::new();

    for round in 0.. {
        let batch = m0.checked_shl(round as u32).unwrap_or(usize::MAX);
        let draw = draw_or_empty(pool, batch)?;
        if draw.is_empty() && !set.is_empty() {
            run.events.push(format!("round {round}: pool exhausted"));
            run.stop = StopReason::PoolExhausted;
            break;
        }
        pool.commit(&draw.indices);
        pool.release_in_flight();
        set.extend_from_slice(&draw.indices);

        let model = {
            let train = pool.gather(&set);
            env.train(learner, &train, n_classes)?
        };
        let elapsed = env.elapsed();
        let is_best = elapsed <= limit;
        let test_accuracy = env.evaluate(&*model);
        if is_best {
            run.returned_round = Some(round);
            run.returned_model = Some(model);
        }
        run.rounds.push(RoundRecord {
            round,
            train_size: set.len(),
            set_size: set.len(),
            random_added: draw.len(),
            fallback: draw.from_fallback > 0,
            shortfall: batch - draw.len(),
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

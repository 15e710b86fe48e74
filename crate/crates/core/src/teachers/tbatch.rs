//! One round: the largest random batch whose training fits the budget.

use super::{RunEnv, TeacherError};
use crate::clock::ClockMode;
use crate::domain::ExamplePool;
use crate::model::Learner;
use crate::trace::{RoundRecord, StopReason, TeacherRun};

/// Trains once on `m_T = max{m : cost(m) <= T}` random examples (capped by
/// the pool size). In wall-clock mode `batch` must be given explicitly.
pub fn run_tbatch(
    learner: &dyn Learner,
    pool: &mut ExamplePool,
    batch: Option<usize>,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    let limit = env.limit();
    let m_t = match (batch, env.clock.mode()) {
        (Some(m), _) => m,
        (None, ClockMode::Simulated) => learner.cost_model().max_affordable(limit),
        (None, ClockMode::Wall) => {
            return Err(TeacherError::InvalidParams("wall-clock TBatch needs an explicit batch size".into()))
        }
    };
    let m = m_t.min(pool.len());
    let mut run = TeacherRun::new("tbatch", learner.name(), serde_json::json!({ "m_t": m_t }));
    if m == 0 {
        run.stop = StopReason::NoModel;
        run.events.push("budget does not cover a single example".into());
        return Ok(run);
    }
    let draw = pool.sample_unseen(m)?;
    pool.commit(&draw.indices);
    pool.release_in_flight();
    let model = {
        let train = pool.gather(&draw.indices);
        env.train(learner, &train, pool.n_classes())?
    };
    let elapsed = env.elapsed();
    let is_best = elapsed <= limit;
    let test_accuracy = env.evaluate(&*model);
    run.rounds.push(RoundRecord {
        round: 0,
        train_size: m,
        set_size: m,
        random_added: m,
        shortfall: m_t - m,
        elapsed,
        is_best,
        test_accuracy,
        ..Default::default()
    });
    if is_best {
        run.returned_round = Some(0);
        run.returned_model = Some(model);
        run.stop = StopReason::Budget;
    } else {
        run.stop = StopReason::NoModel;
    }
    Ok(run)
}

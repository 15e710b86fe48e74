//! Streaming baseline: mini-batch updates over repeated passes of the pool.

use rand::seq::SliceRandom;

use super::{RunEnv, TeacherError};
use crate::domain::ExamplePool;
use crate::model::IncrementalLearner;
use crate::trace::{RoundRecord, StopReason, TeacherRun};

/// Mini-batch boundaries over `passes` passes of a pool of `len` examples;
/// the last batch of each pass may be short.
pub fn batch_sizes(len: usize, batch: usize, passes: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for _ in 0..passes {
        let mut start = 0;
        while start < len {
            let end = (start + batch).min(len);
            out.push(end - start);
            start = end;
        }
    }
    out
}

/// Runs updates until the budget is spent; returns the last state whose
/// update finished within it. Test accuracy is recorded after updates
/// 1, 2, 4, 8, ... and for the returned state.
pub fn run_sgd_stream<L: IncrementalLearner>(
    learner: &L,
    pool: &mut ExamplePool,
    batch: usize,
    env: &mut RunEnv,
) -> Result<TeacherRun, TeacherError> {
    if batch == 0 {
        return Err(TeacherError::InvalidParams("mini-batch size must be at least 1".into()));
    }
    let limit = env.limit();
    let cost = learner.cost_model();
    let mut run = TeacherRun::new("sgd", learner.name(), serde_json::json!({ "batch": batch }));
    let mut state = learner.initial_state(pool.n_features(), pool.n_classes());
    let mut last_ok: Option<(L::State, usize, f64, usize)> = None;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut updates = 0usize;
    let mut seen = 0usize;
    let mut next_eval = 1usize;

    'passes: loop {
        order.shuffle(&mut env.rng);
        for chunk in order.chunks(batch) {
            let examples = pool.gather(chunk);
            learner.partial_update(&mut state, &examples)?;
            env.clock.charge(cost.train_cost(chunk.len()));
            updates += 1;
            seen += chunk.len();
            let elapsed = env.elapsed();
            if elapsed > limit {
                break 'passes;
            }
            if updates == next_eval {
                next_eval *= 2;
                let test_accuracy = env.evaluate(&state);
                run.rounds.push(RoundRecord {
                    round: updates,
                    train_size: seen,
                    set_size: seen,
                    random_added: chunk.len(),
                    elapsed,
                    is_best: true,
                    test_accuracy,
                    ..Default::default()
                });
            }
            last_ok = Some((state.clone(), updates, elapsed, seen));
            if elapsed >= limit {
                break 'passes;
            }
        }
    }

    match last_ok {
        Some((model, round, elapsed, seen)) => {
            if run.rounds.last().is_none_or(|r| r.round != round) {
                let test_accuracy = env.evaluate(&model);
                run.rounds.push(RoundRecord {
                    round,
                    train_size: seen,
                    set_size: seen,
                    elapsed,
                    is_best: true,
                    test_accuracy,
                    ..Default::default()
                });
            }
            run.returned_round = Some(round);
            run.returned_model = Some(std::sync::Arc::new(model));
            run.stop = StopReason::Budget;
        }
        None => run.stop = StopReason::NoModel,
    }
    run.events.push("test accuracy recorded on a doubling schedule of updates".into());
    Ok(run)
}

use proptest::prelude::*;
use rand::Rng;
use tct_core::clock::{CostClock, CostModel, CostShape, TimeBudget};
use tct_core::learners::{LinearSvm, LogisticRegression, SgdClassifier, SgdLoss, ThresholdLearner};
use tct_core::rng::substream;
use tct_core::teachers::{
    run_double, run_dynamic_tct, run_sgd_stream, run_tbatch, run_tct, run_tct_al, run_tctbase, RunEnv, TctBaseParams,
    TctParams, TeacherError,
};
use tct_core::theory::threshold::ThresholdInstance;
use tct_core::{Example, ExamplePool, StopReason};

fn threshold_pool(n: usize, noise: f64, seed: u64) -> ExamplePool {
    let mut rng = substream(seed, "teachers-test/data");
    let ex = (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            Example::new(vec![x], usize::from(x >= 0.5) ^ usize::from(rng.random_bool(noise)))
        })
        .collect();
    ExamplePool::new(ex, 2, substream(seed, "teachers-test/pool")).unwrap()
}

fn blob_pool(n: usize, seed: u64) -> ExamplePool {
    let mut rng = substream(seed, "teachers-test/blobs");
    let ex = (0..n)
        .map(|_| {
            let y = rng.random_range(0..2usize);
            let c = if y == 1 { 1.0 } else { -1.0 };
            Example::new(vec![c + rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0)], y)
        })
        .collect();
    ExamplePool::new(ex, 2, substream(seed, "teachers-test/blob-pool")).unwrap()
}

fn env(limit: f64, seed: u64) -> RunEnv<'static> {
    RunEnv::new(CostClock::simulated(0.0), TimeBudget::new(limit).unwrap(), substream(seed, "teachers-test/env"))
}

#[test]
fn double_returns_last_set_trained_within_budget() {
    let learner = ThresholdLearner::new(CostModel::new(2, CostShape::Constant));
    let mut pool = threshold_pool(5000, 0.1, 1);
    let run = run_double(&learner, &mut pool, 10, &mut env(1e6, 1)).unwrap();

    // oracle: cumulative sizes 10 (2^(r+1) - 1), cumulative cost of squares
    let (mut spent, mut last, mut r) = (0.0, 0usize, 0u32);
    loop {
        let size = 10 * ((1usize << (r + 1)) - 1);
        spent += (size * size) as f64;
        if spent > 1e6 {
            break;
        }
        last = size;
        r += 1;
    }
    assert_eq!(last, 630);
    assert_eq!(run.returned_record().unwrap().train_size, last);
    assert_eq!(run.stop, StopReason::Budget);
}

#[test]
fn double_batches_grow_geometrically() {
    let learner = ThresholdLearner::new(CostModel::default());
    let mut pool = threshold_pool(5000, 0.1, 2);
    let run = run_double(&learner, &mut pool, 100, &mut env(1000.0, 2)).unwrap();
    let batches: Vec<usize> = run.rounds.iter().map(|r| r.random_added).collect();
    let sizes: Vec<usize> = run.rounds.iter().map(|r| r.set_size).collect();
    assert_eq!(&batches[..3], &[100, 200, 400]);
    assert_eq!(&sizes[..3], &[100, 300, 700]);
}

#[test]
fn tbatch_takes_largest_affordable_batch() {
    let cases = [
        (CostModel::new(1, CostShape::Constant), 10.0),
        (CostModel::new(2, CostShape::Constant), 50.0),
        (CostModel::new(2, CostShape::Log2), 1000.0),
    ];
    let mut got = Vec::new();
    for (cost, limit) in cases {
        // oracle: linear scan for the largest affordable m
        let expect = (1..10_000).take_while(|&m| cost.train_cost(m) <= limit).last().unwrap_or(0);
        let learner = ThresholdLearner::new(cost);
        let mut pool = threshold_pool(1000, 0.0, 3);
        let run = run_tbatch(&learner, &mut pool, None, &mut env(limit, 3)).unwrap();
        assert_eq!(run.rounds[0].train_size, expect);
        assert!(run.returned_model.is_some());
        got.push(expect);
    }
    assert_eq!(got, [10, 7, 15]);
}

#[test]
fn sgd_counts_examples_of_finished_updates() {
    let mut sgd = SgdClassifier::new(SgdLoss::Log);
    sgd.n_classes = 2;
    sgd.cost = CostModel::default();
    let mut pool = blob_pool(1000, 4);
    // each update of 64 examples costs 64
    let run = run_sgd_stream(&sgd, &mut pool, 64, &mut env(3.0 * 64.0, 4)).unwrap();
    let last = run.returned_record().unwrap();
    assert_eq!(last.round, 3);
    assert_eq!(last.train_size, 192);
}

#[test]
fn tct_al_splits_uncertain_and_random() {
    let learner = LogisticRegression::default();
    let mut pool = blob_pool(3000, 5);
    let run = run_tct_al(&learner, &mut pool, 100, 0.2, &mut env(1e7, 5)).unwrap();
    let first = &run.rounds[0];
    assert_eq!((first.targeted_added, first.random_added, first.set_size), (20, 80, 200));
    assert_eq!(first.n1, 200);
}

#[test]
fn tct_al_needs_probabilities() {
    let mut pool = blob_pool(500, 6);
    let err = run_tct_al(&LinearSvm::default(), &mut pool, 10, 0.2, &mut env(1e6, 6)).unwrap_err();
    assert!(matches!(err, TeacherError::UnsupportedLearner(_)));
}

#[test]
fn dynamic_tct_uses_error_rate_as_share() {
    let learner = ThresholdLearner::new(CostModel::default());
    let mut pool = threshold_pool(20_000, 0.1, 7);
    let run = run_dynamic_tct(&learner, &mut pool, 10, &mut env(5_000.0, 7)).unwrap();
    assert!(run.rounds.len() >= 3);
    for r in &run.rounds {
        assert_eq!(r.set_size, 2 * r.train_size);
        let alpha = 1.0 - r.acc1.unwrap();
        assert_eq!(r.targeted_added, (alpha * r.train_size as f64 + 1e-9).floor() as usize);
    }
    assert!(run.returned_model.is_some());
}

#[test]
fn tctbase_schedule_and_unbiased_counts() {
    let instance = ThresholdInstance::centered(1);
    let mut params = TctBaseParams::new(0.3);
    params.max_rounds = 12;
    params.draw_limit = u64::MAX;
    let out = run_tctbase(
        &instance,
        &params,
        &mut RunEnv::new(CostClock::simulated(0.0), TimeBudget::unlimited(), substream(8, "tctbase")),
    )
    .unwrap();
    assert_eq!(out.run.stop, StopReason::MaxRounds);
    // oracle: round i adds 2^i, floor(0.3 * 2^i) of them wrong
    let mut unbiased = 1usize;
    for (r, (&size, &u)) in out.set_sizes.iter().zip(&out.unbiased).enumerate() {
        assert_eq!(size, (1 << (r + 1)) - 1);
        assert_eq!(u, unbiased);
        let n = 1usize << (r + 1);
        unbiased += n - (3 * n) / 10;
    }
    assert_eq!(out.set_sizes.len(), 13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_best_model_after_the_budget(limit in 50.0f64..20_000.0, seed in 0u64..1000, alpha in 0.0f64..=1.0) {
        let learner = ThresholdLearner::new(CostModel::default());
        let mut pool = threshold_pool(4000, 0.1, seed);
        let mut e = RunEnv::new(CostClock::simulated(0.05), TimeBudget::new(limit).unwrap(), substream(seed, "budget"));
        let run = run_tct(&learner, &mut pool, &TctParams::new(5, alpha), &mut e).unwrap();
        for r in &run.rounds {
            prop_assert!(!r.is_best || r.elapsed <= limit);
        }
        if let Some(best) = run.returned_record() {
            prop_assert!(best.is_best && best.elapsed <= limit);
        }
    }
}

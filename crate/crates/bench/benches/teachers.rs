use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use tct_core::clock::{CostClock, TimeBudget};
use tct_core::learners::{DecisionTree, LinearSvm, LogisticRegression};
use tct_core::rng::substream;
use tct_core::teachers::{run_double, run_osct, run_tct, run_tctbase, OsctParams, RunEnv, TctBaseParams, TctParams};
use tct_core::theory::threshold::ThresholdInstance;
use tct_core::{Example, ExamplePool, Learner, SyntheticDistribution};

fn blobs(n: usize) -> Vec<Example> {
    SyntheticDistribution::blobs(5, 1.0, 1.0).sample_many(n, &mut substream(1, "bench/blobs"))
}

fn pool(examples: &[Example]) -> ExamplePool {
    ExamplePool::new(examples.to_vec(), 2, substream(1, "bench/pool")).unwrap()
}

fn env(limit: f64) -> RunEnv<'static> {
    RunEnv::new(CostClock::simulated(0.0), TimeBudget::new(limit).unwrap(), substream(1, "bench/env"))
}

fn teachers(c: &mut Criterion) {
    let data = blobs(10_000);
    let learner = LogisticRegression::default();
    let budget = learner.cost_model().train_cost(data.len());
    let mut g = c.benchmark_group("teachers/logreg-10k");
    g.sample_size(10);
    g.bench_function("tct", |b| {
        b.iter_batched(
            || pool(&data),
            |mut p| run_tct(&learner, &mut p, &TctParams::new(50, 0.2), &mut env(budget)).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.bench_function("double", |b| {
        b.iter_batched(
            || pool(&data),
            |mut p| run_double(&learner, &mut p, 50, &mut env(budget)).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.bench_function("osct", |b| {
        b.iter_batched(
            || pool(&data),
            |mut p| run_osct(&learner, &mut p, &OsctParams::new(50), &mut env(budget)).unwrap(),
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn learners(c: &mut Criterion) {
    let data = blobs(5_000);
    let refs: Vec<&Example> = data.iter().collect();
    let mut g = c.benchmark_group("fit/5k");
    g.sample_size(10);
    g.bench_function("logreg", |b| b.iter(|| LogisticRegression::default().train(black_box(&refs), 2).unwrap()));
    g.bench_function("svm", |b| b.iter(|| LinearSvm::default().train(black_box(&refs), 2).unwrap()));
    g.bench_function("tree", |b| b.iter(|| DecisionTree::default().train(black_box(&refs), 2).unwrap()));
    g.finish();
}

fn base_teacher(c: &mut Criterion) {
    let instance = ThresholdInstance::centered(1);
    let params = TctBaseParams { max_rounds: 10, draw_limit: u64::MAX, ..TctBaseParams::new(0.2) };
    c.bench_function("tctbase/threshold-10-rounds", |b| {
        b.iter(|| {
            let mut e = RunEnv::new(CostClock::simulated(0.0), TimeBudget::unlimited(), substream(2, "bench/tctbase"));
            run_tctbase(&instance, &params, &mut e).unwrap().set_sizes.len()
        })
    });
}

criterion_group!(benches, teachers, learners, base_teacher);
criterion_main!(benches);

//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::Rational64;
use rand::Rng;
use tct_core::clock::{CostClock, CostModel, CostShape, TimeBudget};
use tct_core::harness::{
    prepare, replay, run_trial, DataSource, ExperimentConfig, LearnerKind, RunArchive, SyntheticSpec, TeacherSpec,
};
use tct_core::learners::{
    finite_erm, log_loss_and_gradient, threshold_erm, FiniteHypothesisClass, ThresholdHypothesis, ThresholdLearner,
};
use tct_core::model::{Learner, LearnerError, SharedModel};
use tct_core::rng::{substream, trial_stream};
use tct_core::stats::{ci_lower_95, pooled_accuracy, AccuracyEstimate};
use tct_core::teachers::{osct::repetitions, run_osct, run_tct, CountRounding, OsctParams, RunEnv, TctParams};
use tct_core::theory::{
    agnostic_slack_exact, run_bad_example, run_shrinkage, run_threshold_experiment, shape_check, time_multiplier,
    time_multiplier_exact, verify_fallback_bounds, FallbackConfig, ThresholdConfig,
};
use tct_core::{Example, ExamplePool, StopReason, TeacherRun};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bad_example() -> Check {
    let r = run_bad_example(100, 20, 0.9, CountRounding::Nearest, 1).map_err(|e| e.to_string())?;
    let detail = format!("tct success {:.2}, tbatch(1000) success {:.2}", r.tct_success_rate, r.tbatch_success_rate);
    ensure((0.0..=0.20).contains(&r.tct_success_rate), || format!("{detail}; tct outside [0, 0.20]"))?;
    ensure(r.tbatch_successes >= 99, || format!("{detail}; tbatch below 99/100"))?;
    Ok(detail)
}

fn formula_goldens() -> Check {
    let ci = ci_lower_95(AccuracyEstimate::new(0.5, 100));
    ensure((ci - 0.402).abs() <= 1e-12, || format!("ci_lower_95(0.5, 100) = {ci}"))?;
    let pooled = pooled_accuracy(AccuracyEstimate::new(0.8, 100), AccuracyEstimate::new(0.6, 50));
    ensure((pooled.acc - 11.0 / 15.0).abs() <= 1e-12 && pooled.n == 150, || format!("pooled = {pooled:?}"))?;
    let mult = time_multiplier_exact(Rational64::new(1, 3), 2);
    ensure(mult == Rational64::from_integer(54), || format!("multiplier = {mult}"))?;
    let slack = agnostic_slack_exact(Rational64::new(1, 5));
    ensure(slack == Rational64::new(1, 4), || format!("slack = {slack}"))?;
    Ok(format!("ci {ci:.3}, pooled {}/15, multiplier {mult}, slack {slack}", pooled.acc * 15.0))
}

/// 1-d points uniform on [0, 1), label `x >= 0.5` flipped with probability `noise`.
fn noisy_threshold_pool(n: usize, noise: f64, seed: u64) -> ExamplePool {
    let mut rng = substream(seed, "acceptance/pool-data");
    let ex: Vec<Example> = (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            let y = usize::from(x >= 0.5) ^ usize::from(rng.random_bool(noise));
            Example::new(vec![x], y)
        })
        .collect();
    ExamplePool::new(ex, 2, substream(seed, "acceptance/pool")).unwrap()
}

fn tct_trace(pool_size: usize, noise: f64, budget: TimeBudget) -> TeacherRun {
    let learner = ThresholdLearner::new(CostModel::new(1, CostShape::Constant));
    let mut pool = noisy_threshold_pool(pool_size, noise, 3);
    let mut env = RunEnv::new(CostClock::simulated(0.1), budget, substream(3, "acceptance/tct"));
    run_tct(&learner, &mut pool, &TctParams::new(10, 0.2), &mut env).unwrap()
}

/// Ten rounds on one pool; returns the number of rounds where the cap bound.
fn tct_rounds_hold(pool_size: usize, noise: f64) -> Result<usize, String> {
    // place T between the ends of rounds 8 and 9 so round 9 finishes late
    let free = tct_trace(pool_size, noise, TimeBudget::unlimited());
    let limit = (free.rounds[8].elapsed + free.rounds[9].elapsed) / 2.0;
    let run = tct_trace(pool_size, noise, TimeBudget::new(limit).unwrap());
    ensure(run.rounds.len() == 10, || format!("{} rounds", run.rounds.len()))?;
    let mut capped = 0;
    for r in &run.rounds {
        let s = r.train_size;
        ensure(s == 10 << r.round, || format!("round {}: |S| = {s}", r.round))?;
        ensure(r.set_size == 2 * s, || format!("round {}: |S| {s} -> {}", r.round, r.set_size))?;
        ensure(r.random_added == s - s / 5, || format!("round {}: |U| = {}", r.round, r.random_added))?;
        // oracle for |A2| in integers: alpha = 1/5, c correct of n1
        let n1 = r.n1;
        let c = (r.acc1.unwrap() * n1 as f64).round() as usize;
        let expect = if c == n1 { 0 } else { (s * c / (5 * (n1 - c))).min(9 * s) };
        capped += usize::from(expect == 9 * s);
        ensure(r.n2 == expect, || format!("round {}: |A2| = {}, oracle {expect}", r.round, r.n2))?;
        // W is a prefix of the wrong-first order
        ensure(r.targeted_wrong == r.targeted_added.min(r.candidates_wrong), || {
            format!(
                "round {}: W holds {} wrong of {} with {} available",
                r.round, r.targeted_wrong, r.targeted_added, r.candidates_wrong
            )
        })?;
    }
    let best: Vec<_> = run.rounds.iter().filter(|r| r.is_best).collect();
    for w in best.windows(2) {
        ensure(w[1].ci_lower > w[0].ci_lower, || format!("estimator not increasing at round {}", w[1].round))?;
    }
    for r in &run.rounds {
        ensure(!r.is_best || r.elapsed <= limit, || format!("round {} is best after T", r.round))?;
    }
    let late = run.rounds.iter().filter(|r| r.elapsed > limit).count();
    ensure(late == 1 && !run.rounds[9].is_best, || "round 9 should end after T and not be best".into())?;
    Ok(capped)
}

fn tct_structure() -> Check {
    let uncapped = tct_rounds_hold(40_000, 0.1).map_err(|e| format!("noise 0.1: {e}"))?;
    let capped = tct_rounds_hold(150_000, 0.005).map_err(|e| format!("noise 0.005: {e}"))?;
    ensure(capped > 0, || "the cap never bound on the low-noise pool".into())?;
    Ok(format!("10 rounds on two pools; |A2| capped in {uncapped} and {capped} rounds"))
}

/// Always predicts the noiseless target `x >= 0.5`.
struct TargetLearner;

impl Learner for TargetLearner {
    fn name(&self) -> &str {
        "target"
    }

    fn cost_model(&self) -> CostModel {
        CostModel::default()
    }

    fn train(&self, _data: &[&Example], _n_classes: usize) -> Result<SharedModel, LearnerError> {
        Ok(std::sync::Arc::new(ThresholdHypothesis { v: 0.5 }))
    }
}

fn osct_suite() -> Check {
    let learner = ThresholdLearner::new(CostModel::new(1, CostShape::Constant));
    let mut updates = 0;
    let mut restarts = 0;
    for seed in 0..6 {
        let mut pool = noisy_threshold_pool(400, 0.15, seed);
        let budget = TimeBudget::new(20_000.0).unwrap();
        let mut env = RunEnv::new(CostClock::simulated(0.0), budget, trial_stream(seed, "acceptance/osct", 0));
        let run = run_osct(&learner, &mut pool, &OsctParams::new(5), &mut env).unwrap();
        for r in &run.rounds {
            let Some(o) = &r.osct else { return Err(format!("round {} lacks its OSCT record", r.round)) };
            let mut sent = 0;
            for (i, a) in o.attempts.iter().enumerate() {
                updates += 1;
                if a.doublings > 0 {
                    ensure((1.0..2.0).contains(&a.wrong_mass_after), || {
                        format!("seed {seed} round {}: wrong mass {} after doubling", r.round, a.wrong_mass_after)
                    })?;
                } else {
                    ensure(a.wrong_mass_before >= 1.0 && a.wrong_mass_after == a.wrong_mass_before, || {
                        format!("seed {seed} round {}: undoubled mass {}", r.round, a.wrong_mass_before)
                    })?;
                }
                ensure(a.repetitions == repetitions(a.log2_n), || "repetition count".into())?;
                ensure(a.sent <= a.repetitions, || format!("sent {} > {}", a.sent, a.repetitions))?;
                sent += a.sent;
                if a.selected == 0 {
                    restarts += 1;
                    match o.attempts.get(i + 1) {
                        Some(next) => ensure(next.log2_n == 2.0 * a.log2_n, || {
                            format!("N not squared: log2 {} -> {}", a.log2_n, next.log2_n)
                        })?,
                        // the squared guess went past the repetition limit
                        None => ensure(run.stop == StopReason::EarlyStop && r.round + 1 == run.rounds.len(), || {
                            format!("seed {seed} round {}: zero-send attempt neither retried nor abandoned", r.round)
                        })?,
                    }
                }
            }
            let last = o.attempts.last().map_or(0, |a| a.repetitions);
            ensure(sent <= last, || format!("round {} sent {sent} > {last}", r.round))?;
        }
    }
    ensure(restarts > 0, || "no zero-send round observed".into())?;

    let mut pool = noisy_threshold_pool(200, 0.0, 1);
    let mut env =
        RunEnv::new(CostClock::simulated(0.0), TimeBudget::new(1e9).unwrap(), substream(1, "acceptance/osct-perfect"));
    let run = run_osct(&TargetLearner, &mut pool, &OsctParams::new(5), &mut env).unwrap();
    ensure(run.stop == StopReason::Consistent && run.rounds.len() == 1 && run.rounds[0].set_size == 5, || {
        format!("all-correct hypothesis: stop {:?} after {} rounds", run.stop, run.rounds.len())
    })?;
    Ok(format!("{updates} weight updates, {restarts} restarts squared N, consistent model stops at once"))
}

fn threshold_shape() -> Check {
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let reports = eps
        .iter()
        .map(|&e| run_threshold_experiment(&ThresholdConfig::new(e, 0.2, 1)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let shape = shape_check(&reports);
    let detail = format!(
        "tbatch medians {:?}, tct medians {:?}, residuals sqrt {:.3} vs linear {:.3}",
        reports.iter().map(|r| r.tbatch_samples).collect::<Vec<_>>(),
        reports.iter().map(|r| r.tct_samples).collect::<Vec<_>>(),
        shape.sqrt_log_residual,
        shape.linear_log_residual
    );
    ensure(shape.tbatch_ratios.iter().all(|r| (6.0..=14.0).contains(r)), || {
        format!("{detail}; tbatch ratios {:?}", shape.tbatch_ratios)
    })?;
    ensure(shape.tct_ratios.iter().all(|&r| r <= 4.0), || format!("{detail}; tct ratios {:?}", shape.tct_ratios))?;
    ensure(shape.sqrt_log_residual < shape.linear_log_residual, || format!("{detail}; sqrt fit loses"))?;
    Ok(detail)
}

fn shrinkage() -> Check {
    let report = run_shrinkage(0.2, 500, 6, 10, 1).map_err(|e| e.to_string())?;
    ensure(report.containment_violations == 0, || format!("{} containment violations", report.containment_violations))?;
    let mut freqs = Vec::new();
    for row in &report.rows {
        let f = row.left_frequency();
        ensure(row.left_trials > 0, || format!("round {}: no left-side trials", row.round))?;
        ensure(f >= 0.93 && f >= row.bound - 0.05, || format!("round {}: frequency {f:.3}", row.round))?;
        freqs.push(format!("{f:.3}"));
    }
    Ok(format!("left-side frequencies for rounds 6..=10: {}", freqs.join(", ")))
}

fn fallback() -> Check {
    let config = FallbackConfig::new(1);
    let report = verify_fallback_bounds(&config).map_err(|e| e.to_string())?;
    ensure((time_multiplier(0.2, 2) - 31.25).abs() < 1e-12, || "multiplier at 0.2".into())?;
    let rates: Vec<String> = report.rows.iter().map(|r| format!("{:.3}", r.violation_rate)).collect();
    let detail = format!("violation rates {} at budgets {:?}", rates.join(", "), config.budgets);
    ensure(report.max_violation_rate() <= 0.15, || detail.clone())?;
    Ok(detail)
}

fn erm_oracles() -> Check {
    let mut rng = substream(8, "acceptance/erm");
    for case in 0..1000 {
        // threshold: coarse grid values force ties and duplicates
        let n = rng.random_range(1..=200);
        let train: Vec<(f64, i8)> =
            (0..n).map(|_| (rng.random_range(0..40) as f64 / 4.0, if rng.random_bool(0.5) { 1 } else { -1 })).collect();
        let got = threshold_erm(&train).sample_errors(&train);
        let mut cuts: Vec<f64> = train.iter().map(|p| p.0).collect();
        cuts.extend([f64::NEG_INFINITY, f64::INFINITY]);
        let best = cuts.iter().map(|&v| ThresholdHypothesis { v }.sample_errors(&train)).min().unwrap();
        ensure(got == best, || format!("threshold case {case}: erm {got}, brute force {best}"))?;

        // finite class over at most 30 points
        let n_points = rng.random_range(1..=30);
        let n_h = rng.random_range(1..=20);
        let labels: Vec<Vec<i8>> =
            (0..n_h).map(|_| (0..n_points).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()).collect();
        let class = FiniteHypothesisClass::new(n_points, labels.clone(), Vec::new()).map_err(|e| e.to_string())?;
        let m = rng.random_range(1..=200);
        let sample: Vec<(usize, i8)> =
            (0..m).map(|_| (rng.random_range(0..n_points), if rng.random_bool(0.5) { 1 } else { -1 })).collect();
        let errs: Vec<usize> = labels.iter().map(|h| sample.iter().filter(|(p, y)| h[*p] != *y).count()).collect();
        let min = *errs.iter().min().unwrap();
        let first = errs.iter().position(|&e| e == min).unwrap();
        let got = finite_erm(&class, &sample);
        ensure(got == first, || format!("finite case {case}: erm {got}, brute force {first}"))?;
    }
    Ok("1000 threshold and 1000 finite-class instances match brute force".into())
}

fn gradient_check() -> Check {
    let mut rng = substream(9, "acceptance/gradient");
    let mut worst = 0.0f64;
    for pair in 0..20 {
        let d = rng.random_range(1..=6);
        let k = rng.random_range(2..=4);
        let w: Vec<f64> = (0..k * (d + 1)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let batch: Vec<Example> = (0..rng.random_range(1..=30))
            .map(|_| Example::new((0..d).map(|_| rng.random_range(-2.0..2.0)).collect(), rng.random_range(0..k)))
            .collect();
        let refs: Vec<&Example> = batch.iter().collect();
        let l2 = if pair % 2 == 0 { 0.0 } else { 1e-2 };
        let (_, g) = log_loss_and_gradient(&w, d, k, &refs, l2);
        let h = 1e-5;
        let fd: Vec<f64> = (0..w.len())
            .map(|i| {
                let mut up = w.clone();
                let mut down = w.clone();
                up[i] += h;
                down[i] -= h;
                (log_loss_and_gradient(&up, d, k, &refs, l2).0 - log_loss_and_gradient(&down, d, k, &refs, l2).0)
                    / (2.0 * h)
            })
            .collect();
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale =
            g.iter().map(|a| a * a).sum::<f64>().sqrt().max(fd.iter().map(|a| a * a).sum::<f64>().sqrt()).max(1e-12);
        let rel = diff / scale;
        worst = worst.max(rel);
        ensure(rel < 1e-5, || format!("pair {pair}: relative error {rel:e}"))?;
    }
    Ok(format!("worst relative error {worst:.2e} over 20 pairs"))
}

fn end_to_end() -> Check {
    let spec = SyntheticSpec::preset("blobs", 20_000).map_err(|e| e.to_string())?;
    let base = ExperimentConfig::new(TeacherSpec::Double, LearnerKind::LinearSvm, DataSource::Synthetic { spec }, 7);
    let prepared = prepare(&base).map_err(|e| e.to_string())?;
    ensure(prepared.m0 == 100, || format!("m0 = {}", prepared.m0))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("runs.jsonl");
    let mut archive = RunArchive::open(&path).map_err(|e| e.to_string())?;
    let mut parts = vec![format!("full-data accuracy {:.4}", prepared.full_accuracy)];
    for teacher in [TeacherSpec::tct(0.2), TeacherSpec::Double] {
        let config = ExperimentConfig { teacher, ..base.clone() };
        let record = run_trial(&config, &prepared, 0).map_err(|e| e.to_string())?;
        let acc = record.final_accuracy().ok_or("no model returned")?;
        let gap = (prepared.full_accuracy - acc) * 100.0;
        parts.push(format!("{} {acc:.4}", record.teacher));
        ensure(gap.abs() <= 2.0, || format!("{}: {gap:.2} points from full training", record.teacher))?;
        archive.append(&record).map_err(|e| e.to_string())?;
    }
    drop(archive);
    for record in RunArchive::load(&path).map_err(|e| e.to_string())? {
        let again = replay(&record).map_err(|e| e.to_string())?;
        let a = serde_json::to_string(&record).map_err(|e| e.to_string())?;
        let b = serde_json::to_string(&again).map_err(|e| e.to_string())?;
        ensure(again == record && a == b, || format!("{} did not replay identically", record.teacher))?;
    }
    parts.push("archive replays identically".into());
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("bad-example reproduction", bad_example),
        ("exact formula goldens", formula_goldens),
        ("TCT structural suite", tct_structure),
        ("OSCT suite", osct_suite),
        ("threshold speedup shape", threshold_shape),
        ("interval shrinkage", shrinkage),
        ("fallback bound", fallback),
        ("ERM oracle equivalence", erm_oracles),
        ("gradient check", gradient_check),
        ("end-to-end sanity", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

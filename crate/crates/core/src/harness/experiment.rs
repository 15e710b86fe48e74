//! Runs one configured teacher against one learner and dataset, once per
//! trial, evaluating every new model on the test split with the clock paused.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BudgetRule, DataSource, ExperimentConfig, TeacherSpec};
use super::dataset::{load_dataset, Dataset, SplitOptions};
use super::measure::{measure_full_training_time, FullTrainingTime};
use super::HarnessError;
use crate::clock::{ClockMode, CostClock, TimeBudget};
use crate::domain::Example;
use crate::learners::SgdClassifier;
use crate::model::{accuracy, Learner, Model};
use crate::rng::trial_stream;
use crate::stats::Z_95;
use crate::teachers::{
    run_double, run_osct, run_sgd_stream, run_tbatch, run_tct, run_tct_al, OsctParams, RunEnv, TctParams, TeacherError,
};
use crate::trace::TeacherRun;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed {
        run: TeacherRun,
    },
    /// The teacher cannot drive this learner; nothing was run.
    UnsupportedCombination {
        reason: String,
    },
}

/// One archived `(teacher, learner, dataset, seed, trial)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub teacher: String,
    pub learner: String,
    pub dataset: String,
    pub seed: u64,
    pub trial: usize,
    pub config: ExperimentConfig,
    pub t_full: FullTrainingTime,
    pub budget: f64,
    pub m0: usize,
    pub test_size: usize,
    /// Test accuracy of the learner trained on the whole train split.
    pub full_accuracy: f64,
    /// Test accuracy of predicting the majority class.
    pub majority_baseline: f64,
    pub outcome: RunOutcome,
}

impl RunRecord {
    pub fn run(&self) -> Option<&TeacherRun> {
        match &self.outcome {
            RunOutcome::Completed { run } => Some(run),
            RunOutcome::UnsupportedCombination { .. } => None,
        }
    }

    /// Test accuracy of the returned model, or the majority baseline when
    /// the teacher returned none.
    pub fn final_accuracy(&self) -> Option<f64> {
        self.run().map(|r| r.final_test_accuracy().unwrap_or(self.majority_baseline))
    }
}

/// Data, learner and budget shared by every trial of a configuration.
pub struct Prepared {
    pub dataset: Dataset,
    pub learner: Box<dyn Learner>,
    pub t_full: FullTrainingTime,
    pub budget: f64,
    pub m0: usize,
    pub full_accuracy: f64,
}

pub fn load_data(config: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    let mut options = SplitOptions::new(config.seed);
    match &config.data {
        DataSource::Csv { path, label } => {
            options.label = label.clone();
            load_dataset(path, &options)
        }
        DataSource::Synthetic { spec } => spec.generate(&options),
    }
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    config.validate()?;
    let dataset = load_data(config)?;
    let learner = config.learner.build(config.clock.cost, config.seed);
    let n_classes = dataset.n_classes();
    let t_full = measure_full_training_time(
        learner.as_ref(),
        &dataset.train,
        n_classes,
        config.clock.mode,
        config.validity_threshold,
    )?;
    let budget = match config.budget {
        BudgetRule::Fixed { limit } => limit,
        BudgetRule::FullTraining { fraction } => fraction * t_full.mean,
    };
    let train: Vec<&Example> = dataset.train.iter().collect();
    let test: Vec<&Example> = dataset.test.iter().collect();
    let full_accuracy = accuracy(learner.train(&train, n_classes)?.as_ref(), &test);
    let m0 = config.resolve_m0(dataset.total_len());
    Ok(Prepared { dataset, learner, t_full, budget, m0, full_accuracy })
}

pub fn run_trial(config: &ExperimentConfig, prepared: &Prepared, trial: usize) -> Result<RunRecord, HarnessError> {
    let dataset = &prepared.dataset;
    let learner = prepared.learner.as_ref();
    let test: Vec<&Example> = dataset.test.iter().collect();
    let probe = |m: &dyn Model| accuracy(m, &test);
    let budget = TimeBudget::new(prepared.budget)
        .ok_or_else(|| HarnessError::InvalidConfig("budget must be positive".into()))?;
    let clock = CostClock::new(config.clock.mode, config.clock.classify_cost);
    let mut env = RunEnv::new(clock, budget, trial_stream(config.seed, "harness/teacher", trial)).with_probe(&probe);
    let mut pool = dataset.train_pool(trial_stream(config.seed, "harness/pool", trial))?;
    let m0 = prepared.m0;

    let result = match &config.teacher {
        TeacherSpec::Tct { alpha, a2_cap } => {
            run_tct(learner, &mut pool, &TctParams { m0, alpha: *alpha, a2_cap: *a2_cap, z: Z_95 }, &mut env)
        }
        TeacherSpec::Double => run_double(learner, &mut pool, m0, &mut env),
        TeacherSpec::Osct { n_guess, save_best } => {
            run_osct(learner, &mut pool, &OsctParams { n_guess: *n_guess, save_best: *save_best, m0 }, &mut env)
        }
        TeacherSpec::Tbatch { batch } => run_tbatch(learner, &mut pool, *batch, &mut env),
        TeacherSpec::TctAl { alpha } => run_tct_al(learner, &mut pool, m0, *alpha, &mut env),
        TeacherSpec::SgdStream { batch } => match config.learner.sgd_loss() {
            Some(loss) => {
                let mut sgd = SgdClassifier::new(loss);
                sgd.n_classes = dataset.n_classes();
                if let Some(cost) = config.clock.cost {
                    sgd.cost = cost;
                }
                run_sgd_stream(&sgd, &mut pool, batch.unwrap_or(loss.default_batch()), &mut env)
            }
            None => Err(TeacherError::UnsupportedLearner(learner.name().to_string())),
        },
    };
    let outcome = match result {
        Ok(run) => RunOutcome::Completed { run },
        Err(e @ TeacherError::UnsupportedLearner(_)) => RunOutcome::UnsupportedCombination { reason: e.to_string() },
        Err(e) => return Err(e.into()),
    };
    Ok(RunRecord {
        teacher: config.teacher.label(),
        learner: learner.name().to_string(),
        dataset: dataset.name.clone(),
        seed: config.seed,
        trial,
        config: config.clone(),
        t_full: prepared.t_full.clone(),
        budget: prepared.budget,
        m0,
        test_size: dataset.test.len(),
        full_accuracy: prepared.full_accuracy,
        majority_baseline: dataset.test_majority_rate(),
        outcome,
    })
}

/// All trials of `config`. Simulated-clock trials run in parallel.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    let prepared = prepare(config)?;
    run_prepared(config, &prepared)
}

fn run_prepared(config: &ExperimentConfig, prepared: &Prepared) -> Result<Vec<RunRecord>, HarnessError> {
    match config.clock.mode {
        ClockMode::Simulated => (0..config.trials).into_par_iter().map(|t| run_trial(config, prepared, t)).collect(),
        ClockMode::Wall => (0..config.trials).map(|t| run_trial(config, prepared, t)).collect(),
    }
}

/// One experiment per alpha in `grid`, sharing data and `t_DL`.
pub fn sweep_alpha(config: &ExperimentConfig, grid: &[f64]) -> Result<Vec<RunRecord>, HarnessError> {
    let prepared = prepare(config)?;
    let mut records = Vec::new();
    for &alpha in grid {
        let teacher = config
            .teacher
            .with_alpha(alpha)
            .ok_or_else(|| HarnessError::InvalidConfig(format!("teacher `{}` has no alpha", config.teacher.label())))?;
        let c = ExperimentConfig { teacher, ..config.clone() };
        records.extend(run_prepared(&c, &prepared)?);
    }
    Ok(records)
}

/// One experiment per teacher, sharing data and `t_DL`.
pub fn sweep_teachers(config: &ExperimentConfig, teachers: &[TeacherSpec]) -> Result<Vec<RunRecord>, HarnessError> {
    let prepared = prepare(config)?;
    let mut records = Vec::new();
    for teacher in teachers {
        let c = ExperimentConfig { teacher: teacher.clone(), ..config.clone() };
        records.extend(run_prepared(&c, &prepared)?);
    }
    Ok(records)
}

/// Re-runs an archived record from its config, seed and trial.
pub fn replay(record: &RunRecord) -> Result<RunRecord, HarnessError> {
    let prepared = prepare(&record.config)?;
    run_trial(&record.config, &prepared, record.trial)
}

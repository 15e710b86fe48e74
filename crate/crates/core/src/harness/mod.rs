//! Experiment orchestration: datasets, configuration, runs, the archive and
//! reports.

use thiserror::Error;

use crate::domain::PoolError;
use crate::model::LearnerError;
use crate::teachers::TeacherError;

pub mod archive;
pub mod config;
pub mod dataset;
pub mod experiment;
pub mod measure;
pub mod report;

pub use archive::RunArchive;
pub use config::{
    BudgetRule, ClockSpec, DataSource, ExperimentConfig, LearnerKind, TeacherSpec, ALPHA_GRID, DEFAULT_M0_FRACTION,
};
pub use dataset::{load_dataset, load_dataset_from_reader, Dataset, LabelColumn, SplitOptions, SyntheticSpec};
pub use experiment::{
    prepare, replay, run_experiment, run_trial, sweep_alpha, sweep_teachers, Prepared, RunOutcome, RunRecord,
};
pub use measure::{measure_full_training_time, FullTrainingTime};
pub use report::{curve_rows, emit_reports, win_loss_rows, CurveRow, ReportFiles, WinLossRow, CURVE_COLUMNS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Teacher(#[from] TeacherError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Pool(#[from] PoolError),
}

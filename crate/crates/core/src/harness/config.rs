//! Experiment configuration, serialized as the JSON sidecar of every run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::dataset::{LabelColumn, SyntheticSpec};
use super::HarnessError;
use crate::clock::{ClockMode, CostModel};
use crate::learners::{BaggedTrees, DecisionTree, LinearSvm, LogisticRegression, SgdLoss};
use crate::model::Learner;
use crate::teachers::{AlphaRule, NGuessRule};

/// The alpha grid of the sweep mode.
pub const ALPHA_GRID: [f64; 7] = [0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.9];

pub const DEFAULT_M0_FRACTION: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "teacher", rename_all = "snake_case")]
pub enum TeacherSpec {
    Tct {
        alpha: AlphaRule,
        #[serde(default = "default_a2_cap")]
        a2_cap: f64,
    },
    Double,
    Osct {
        n_guess: NGuessRule,
        save_best: bool,
    },
    Tbatch {
        batch: Option<usize>,
    },
    TctAl {
        alpha: f64,
    },
    /// Mini-batch SGD over the pool; hinge loss for the SVM learner, log
    /// loss for logistic regression.
    SgdStream {
        batch: Option<usize>,
    },
}

fn default_a2_cap() -> f64 {
    9.0
}

impl TeacherSpec {
    pub fn tct(alpha: f64) -> Self {
        TeacherSpec::Tct { alpha: AlphaRule::Fixed { alpha }, a2_cap: default_a2_cap() }
    }

    /// Parses a CLI teacher id; `alpha` applies to the alpha-driven teachers.
    pub fn parse(id: &str, alpha: f64) -> Result<Self, HarnessError> {
        Ok(match id {
            "tct" => Self::tct(alpha),
            "tct_dynamic" => TeacherSpec::Tct { alpha: AlphaRule::OneMinusAcc, a2_cap: default_a2_cap() },
            "double" => TeacherSpec::Double,
            "osct" => TeacherSpec::Osct { n_guess: NGuessRule::Fixed { n: 2.0 }, save_best: false },
            "osct_exp" => TeacherSpec::Osct { n_guess: NGuessRule::ExpFraction { fraction: 0.005 }, save_best: false },
            "osct_best" => TeacherSpec::Osct { n_guess: NGuessRule::Fixed { n: 2.0 }, save_best: true },
            "tbatch" => TeacherSpec::Tbatch { batch: None },
            "tct_al" => TeacherSpec::TctAl { alpha },
            "sgd" => TeacherSpec::SgdStream { batch: None },
            other => return Err(HarnessError::InvalidConfig(format!("unknown teacher `{other}`"))),
        })
    }

    /// Label used in reports; distinguishes parameter settings.
    pub fn label(&self) -> String {
        match self {
            TeacherSpec::Tct { alpha: AlphaRule::Fixed { alpha }, .. } => format!("tct[alpha={alpha}]"),
            TeacherSpec::Tct { alpha: AlphaRule::OneMinusAcc, .. } => "tct_dynamic".into(),
            TeacherSpec::Double => "double".into(),
            TeacherSpec::Osct { n_guess, save_best } => {
                let base = match n_guess {
                    NGuessRule::Fixed { n } => format!("osct[n={n}]"),
                    NGuessRule::ExpFraction { fraction } => format!("osct[n=2^({fraction}m)]"),
                };
                if *save_best {
                    format!("{base}+best")
                } else {
                    base
                }
            }
            TeacherSpec::Tbatch { .. } => "tbatch".into(),
            TeacherSpec::TctAl { alpha } => format!("tct_al[alpha={alpha}]"),
            TeacherSpec::SgdStream { .. } => "sgd_stream".into(),
        }
    }

    /// The same teacher with a different alpha, when it has one.
    pub fn with_alpha(&self, alpha: f64) -> Option<Self> {
        match self {
            TeacherSpec::Tct { a2_cap, .. } => {
                Some(TeacherSpec::Tct { alpha: AlphaRule::Fixed { alpha }, a2_cap: *a2_cap })
            }
            TeacherSpec::TctAl { .. } => Some(TeacherSpec::TctAl { alpha }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    DecisionTree,
    BaggedTrees,
    LogisticRegression,
    LinearSvm,
}

impl LearnerKind {
    pub fn parse(id: &str) -> Result<Self, HarnessError> {
        Ok(match id {
            "tree" | "decision_tree" => LearnerKind::DecisionTree,
            "bagged" | "bagged_trees" => LearnerKind::BaggedTrees,
            "logreg" | "logistic_regression" => LearnerKind::LogisticRegression,
            "svm" | "linear_svm" => LearnerKind::LinearSvm,
            other => return Err(HarnessError::InvalidConfig(format!("unknown learner `{other}`"))),
        })
    }

    /// Default-configured learner, with `cost` replacing its own cost model.
    pub fn build(self, cost: Option<CostModel>, seed: u64) -> Box<dyn Learner> {
        match self {
            LearnerKind::DecisionTree => {
                let mut l = DecisionTree::default();
                l.cost = cost.unwrap_or(l.cost);
                Box::new(l)
            }
            LearnerKind::BaggedTrees => {
                let mut l = BaggedTrees { seed, ..Default::default() };
                l.cost = cost.unwrap_or(l.cost);
                Box::new(l)
            }
            LearnerKind::LogisticRegression => {
                let mut l = LogisticRegression::default();
                l.cost = cost.unwrap_or(l.cost);
                Box::new(l)
            }
            LearnerKind::LinearSvm => {
                let mut l = LinearSvm::default();
                l.cost = cost.unwrap_or(l.cost);
                Box::new(l)
            }
        }
    }

    /// Loss of the matching incremental learner.
    pub fn sgd_loss(self) -> Option<SgdLoss> {
        match self {
            LearnerKind::LinearSvm => Some(SgdLoss::Hinge),
            LearnerKind::LogisticRegression => Some(SgdLoss::Log),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        label: LabelColumn,
    },
    Synthetic {
        spec: SyntheticSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockSpec {
    pub mode: ClockMode,
    /// Replaces the learner's own `(k, f)` cost parameters.
    pub cost: Option<CostModel>,
    /// Simulated cost of classifying one example.
    pub classify_cost: f64,
}

impl Default for ClockSpec {
    fn default() -> Self {
        Self { mode: ClockMode::Simulated, cost: None, classify_cost: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BudgetRule {
    Fixed {
        limit: f64,
    },
    /// `fraction` times the full-training time of the learner.
    FullTraining {
        fraction: f64,
    },
}

impl Default for BudgetRule {
    fn default() -> Self {
        BudgetRule::FullTraining { fraction: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub teacher: TeacherSpec,
    pub learner: LearnerKind,
    pub data: DataSource,
    #[serde(default)]
    pub clock: ClockSpec,
    #[serde(default)]
    pub budget: BudgetRule,
    /// Initial set size as a fraction of the full dataset.
    #[serde(default = "default_m0_fraction")]
    pub m0_fraction: f64,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Wall-mode full-training times below this are flagged invalid.
    #[serde(default = "default_validity")]
    pub validity_threshold: f64,
    pub out: Option<PathBuf>,
}

fn default_m0_fraction() -> f64 {
    DEFAULT_M0_FRACTION
}

fn default_trials() -> usize {
    1
}

fn default_validity() -> f64 {
    10.0
}

impl ExperimentConfig {
    pub fn new(teacher: TeacherSpec, learner: LearnerKind, data: DataSource, seed: u64) -> Self {
        Self {
            teacher,
            learner,
            data,
            clock: ClockSpec::default(),
            budget: BudgetRule::default(),
            m0_fraction: DEFAULT_M0_FRACTION,
            seed,
            trials: 1,
            validity_threshold: default_validity(),
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.m0_fraction > 0.0 && self.m0_fraction <= 1.0) {
            return Err(HarnessError::InvalidConfig(format!("m0 fraction {} outside (0, 1]", self.m0_fraction)));
        }
        if self.trials == 0 {
            return Err(HarnessError::InvalidConfig("trials must be positive".into()));
        }
        match self.budget {
            BudgetRule::Fixed { limit } if !(limit > 0.0) => {
                return Err(HarnessError::InvalidConfig("budget must be positive".into()))
            }
            BudgetRule::FullTraining { fraction } if !(fraction > 0.0) => {
                return Err(HarnessError::InvalidConfig("budget fraction must be positive".into()))
            }
            _ => {}
        }
        if !(self.clock.classify_cost >= 0.0) {
            return Err(HarnessError::InvalidConfig("classification cost must be non-negative".into()));
        }
        Ok(())
    }

    /// `ceil(m0_fraction * total_rows)`, at least 1.
    pub fn resolve_m0(&self, total_rows: usize) -> usize {
        ((self.m0_fraction * total_rows as f64 - 1e-9).ceil() as usize).max(1)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        let spec = SyntheticSpec::preset("blobs", 1000).unwrap();
        ExperimentConfig::new(TeacherSpec::tct(0.2), LearnerKind::LinearSvm, DataSource::Synthetic { spec }, 3)
    }

    #[test]
    fn m0_is_half_a_percent_of_the_dataset() {
        let c = config();
        assert_eq!(c.resolve_m0(20_000), 100);
        assert_eq!(c.resolve_m0(1_000), 5);
        assert_eq!(c.resolve_m0(10), 1);
        assert_eq!(c.resolve_m0(1_001), 6);
    }

    #[test]
    fn json_sidecar_round_trips() {
        let c = config();
        assert_eq!(ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
        let minimal = r#"{"teacher":{"teacher":"double"},"learner":"linear_svm",
            "data":{"source":"csv","path":"x.csv"},"seed":1,"out":null}"#;
        let parsed = ExperimentConfig::from_json(minimal).unwrap();
        assert_eq!(parsed.m0_fraction, DEFAULT_M0_FRACTION);
        assert_eq!(parsed.budget, BudgetRule::FullTraining { fraction: 1.0 });
    }

    #[test]
    fn teacher_ids_and_labels() {
        assert_eq!(TeacherSpec::parse("tct", 0.3).unwrap().label(), "tct[alpha=0.3]");
        assert_eq!(TeacherSpec::parse("osct_best", 0.0).unwrap().label(), "osct[n=2]+best");
        assert!(TeacherSpec::parse("nope", 0.1).is_err());
        assert_eq!(TeacherSpec::Double.with_alpha(0.2), None);
    }
}

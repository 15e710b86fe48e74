//! Per-round traces of teacher runs.

use serde::{Deserialize, Serialize};

use crate::model::SharedModel;

/// One weight update and sampling pass of OSCT. A pass that sends nothing
/// squares the guess `N` and is followed by another attempt in the same round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsctAttempt {
    pub log2_n: f64,
    /// Smallest doubling exponent `l` with `2^l * wrong_mass_before >= 1`.
    pub doublings: u32,
    pub wrong_mass_before: f64,
    pub wrong_mass_after: f64,
    pub repetitions: usize,
    /// Repetitions that picked an example.
    pub selected: usize,
    /// Distinct examples newly added to the sent set.
    pub sent: usize,
}

/// OSCT-specific bookkeeping for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsctRound {
    pub wrong_count: usize,
    pub attempts: Vec<OsctAttempt>,
}

/// One round of a teacher run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RoundRecord {
    pub round: usize,
    /// Size of the training set the round's model was built on.
    pub train_size: usize,
    /// Training-set size after this round's additions.
    pub set_size: usize,
    pub random_added: usize,
    pub targeted_added: usize,
    /// Added examples the round's model misclassified.
    pub wrong_added: usize,
    /// TCT: misclassified examples among the targeted additions, and among
    /// all candidates they were picked from.
    pub targeted_wrong: usize,
    pub candidates_wrong: usize,
    pub acc1: Option<f64>,
    pub n1: usize,
    pub acc2: Option<f64>,
    pub n2: usize,
    pub pooled_acc: Option<f64>,
    pub ci_lower: Option<f64>,
    /// Uncapped `|A2|` request, when a cap applied.
    pub a2_requested: Option<u64>,
    pub a2_capped: bool,
    pub rejection_draws: u64,
    pub fallback: bool,
    pub shortfall: usize,
    /// Clock reading when the round's model became available for selection.
    pub elapsed: f64,
    /// This round's model is what the teacher would return if stopped now.
    pub is_best: bool,
    pub test_accuracy: Option<f64>,
    pub osct: Option<OsctRound>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    PoolExhausted,
    /// OSCT: hypothesis correct on every example.
    Consistent,
    /// TCTbase: error target reached or wrong examples could not be found.
    EarlyStop,
    MaxRounds,
    NoModel,
}

/// Full trace of a teacher run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TeacherRun {
    pub teacher: String,
    pub learner: String,
    pub params: serde_json::Value,
    pub rounds: Vec<RoundRecord>,
    pub returned_round: Option<usize>,
    pub stop: StopReason,
    pub events: Vec<String>,
    #[serde(skip)]
    pub returned_model: Option<SharedModel>,
}

impl TeacherRun {
    pub fn new(teacher: &str, learner: &str, params: serde_json::Value) -> Self {
        Self {
            teacher: teacher.to_string(),
            learner: learner.to_string(),
            params,
            rounds: Vec::new(),
            returned_round: None,
            stop: StopReason::Budget,
            events: Vec::new(),
            returned_model: None,
        }
    }

    pub fn returned_record(&self) -> Option<&RoundRecord> {
        self.returned_round.and_then(|r| self.rounds.iter().find(|rec| rec.round == r))
    }

    /// Test accuracy of the returned model, if evaluated.
    pub fn final_test_accuracy(&self) -> Option<f64> {
        self.returned_record().and_then(|r| r.test_accuracy)
    }

    /// `(time, test accuracy)` each time the would-return model changed.
    pub fn model_timeline(&self) -> Vec<(f64, f64)> {
        self.rounds.iter().filter(|r| r.is_best).filter_map(|r| r.test_accuracy.map(|a| (r.elapsed, a))).collect()
    }

    /// `(time, CI lower bound)` each time the would-return model changed.
    pub fn estimator_timeline(&self) -> Vec<(f64, f64)> {
        self.rounds.iter().filter(|r| r.is_best).filter_map(|r| r.ci_lower.map(|c| (r.elapsed, c))).collect()
    }
}

impl PartialEq for TeacherRun {
    /// Compares traces; the opaque model handle is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.teacher == other.teacher
            && self.learner == other.learner
            && self.params == other.params
            && self.rounds == other.rounds
            && self.returned_round == other.returned_round
            && self.stop == other.stop
            && self.events == other.events
    }
}

//! Desk-scale learners behind the black-box [`Learner`](crate::model::Learner)
//! contract.

pub mod bagged;
pub mod finite;
pub mod linear;
pub mod threshold;
pub mod tree;

pub use bagged::{BaggedTrees, BaggedTreesModel};
pub use finite::{finite_erm, FiniteErmLearner, FiniteHypothesisClass, FiniteHypothesisModel};
pub use linear::{
    hinge_loss_and_subgradient, log_loss_and_gradient, LinearKind, LinearModel, LinearSvm, LogisticRegression,
    SgdClassifier, SgdLoss,
};
pub use threshold::{threshold_erm, ThresholdHypothesis, ThresholdLearner};
pub use tree::{DecisionTree, DecisionTreeModel};

//! From-scratch tree-based learners and the logistic meta-learner.
//! All of them share one prediction convention: `predict_proba` returns
//! the positive-class probability and hard labels are
//! `1[p > DECISION_THRESHOLD]`.

mod adaboost;
mod boost;
mod forest;
mod logistic;
mod tree;

pub use adaboost::{fit_adaboost, AdaBoostModel, AdaBoostParams};
pub use boost::{
    fit_gboost, fit_xgb, staged_log_loss, xgb_split_gain, BoostFlavor, BoostedModel, GboostParams,
    RegNode, RegTree, XgbParams,
};
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use logistic::{fit_logistic, LogisticModel, LogisticParams};
pub use tree::{fit_tree, gini, Node, TreeModel, TreeParams};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::rng::derive_seed;

/// The single hard-label cutoff used everywhere.
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Probabilities are clamped to this band before any logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
}

/// Per-sample logistic loss at a raw margin.
pub fn logistic_loss(margin: f64, y: u8) -> f64 {
    let p = clamp_probability(sigmoid(margin));
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// First and second derivative of the logistic loss with respect to the
/// margin: `(p - y, p * (1 - p))`.
pub fn logistic_grad_hess(margin: f64, y: u8) -> (f64, f64) {
    let p = sigmoid(margin);
    (p - y as f64, p * (1.0 - p))
}

/// Mean clamped log-loss of probabilistic predictions.
pub fn log_loss(probabilities: &[f64], labels: &[u8]) -> f64 {
    debug_assert_eq!(probabilities.len(), labels.len());
    let total: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = clamp_probability(p);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / labels.len() as f64
}

pub fn hard_label(p: f64) -> u8 {
    (p > DECISION_THRESHOLD) as u8
}

/// A fitted base learner of any supported kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    DecisionTree(TreeModel),
    RandomForest(ForestModel),
    GradientBoost(BoostedModel),
    Xgboost(BoostedModel),
    AdaBoost(AdaBoostModel),
    Logistic(LogisticModel),
}

impl FittedModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FittedModel::DecisionTree(_) => "dt",
            FittedModel::RandomForest(_) => "rf",
            FittedModel::GradientBoost(_) => "gboost",
            FittedModel::Xgboost(_) => "xgb",
            FittedModel::AdaBoost(_) => "adaboost",
            FittedModel::Logistic(_) => "logistic",
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            FittedModel::DecisionTree(m) => m.predict_proba(x),
            FittedModel::RandomForest(m) => m.predict_proba(x),
            FittedModel::GradientBoost(m) | FittedModel::Xgboost(m) => m.predict_proba(x),
            FittedModel::AdaBoost(m) => m.predict_proba(x),
            FittedModel::Logistic(m) => m.predict_proba(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(hard_label(self.predict_proba(x)?))
    }

    pub fn predict_proba_batch(&self, d: &Dataset) -> Result<Vec<f64>> {
        (0..d.n_rows())
            .map(|i| self.predict_proba(d.row(i)))
            .collect()
    }

    pub fn predict_batch(&self, d: &Dataset) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba_batch(d)?
            .into_iter()
            .map(hard_label)
            .collect())
    }
}

/// Hyperparameters for one base learner, as found in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerConfig {
    Dt(TreeParams),
    Rf(ForestParams),
    Gboost(GboostParams),
    Xgb(XgbParams),
    Adaboost(AdaBoostParams),
    Logistic(LogisticParams),
}

impl LearnerConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LearnerConfig::Dt(_) => "dt",
            LearnerConfig::Rf(_) => "rf",
            LearnerConfig::Gboost(_) => "gboost",
            LearnerConfig::Xgb(_) => "xgb",
            LearnerConfig::Adaboost(_) => "adaboost",
            LearnerConfig::Logistic(_) => "logistic",
        }
    }

    /// Fits this learner. `seed` only matters for the forest; the other
    /// learners are deterministic functions of the data.
    pub fn fit(&self, train: &Dataset, seed: u64) -> Result<FittedModel> {
        Ok(match self {
            LearnerConfig::Dt(p) => FittedModel::DecisionTree(fit_tree(train, p)?),
            LearnerConfig::Rf(p) => {
                FittedModel::RandomForest(fit_forest(train, p, derive_seed(seed, "forest"))?)
            }
            LearnerConfig::Gboost(p) => FittedModel::GradientBoost(fit_gboost(train, p)?),
            LearnerConfig::Xgb(p) => FittedModel::Xgboost(fit_xgb(train, p)?),
            LearnerConfig::Adaboost(p) => FittedModel::AdaBoost(fit_adaboost(train, p)?),
            LearnerConfig::Logistic(p) => FittedModel::Logistic(fit_logistic(train, p)?),
        })
    }
}

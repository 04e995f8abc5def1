//! Versioned JSON model files. Every fitted model, single or ensemble,
//! serializes into a tagged envelope carrying the format version, the
//! toolkit version that wrote it, and the fitting seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::ensemble::{predict_stacked, predict_voting, StackedModel, VotingModel};
use crate::error::{Error, Result};
use crate::learners::{
    hard_label, AdaBoostModel, BoostedModel, FittedModel, ForestModel, LogisticModel, TreeModel,
};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Any model the toolkit can fit, tagged for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnyModel {
    Dt(TreeModel),
    Rf(ForestModel),
    Gboost(BoostedModel),
    Xgb(BoostedModel),
    Adaboost(AdaBoostModel),
    Logistic(LogisticModel),
    Stacked(StackedModel),
    Voting(VotingModel),
}

impl From<FittedModel> for AnyModel {
    fn from(m: FittedModel) -> Self {
        match m {
            FittedModel::DecisionTree(t) => AnyModel::Dt(t),
            FittedModel::RandomForest(f) => AnyModel::Rf(f),
            FittedModel::GradientBoost(b) => AnyModel::Gboost(b),
            FittedModel::Xgboost(b) => AnyModel::Xgb(b),
            FittedModel::AdaBoost(a) => AnyModel::Adaboost(a),
            FittedModel::Logistic(l) => AnyModel::Logistic(l),
        }
    }
}

impl AnyModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyModel::Dt(_) => "dt",
            AnyModel::Rf(_) => "rf",
            AnyModel::Gboost(_) => "gboost",
            AnyModel::Xgb(_) => "xgb",
            AnyModel::Adaboost(_) => "adaboost",
            AnyModel::Logistic(_) => "logistic",
            AnyModel::Stacked(_) => "stacked",
            AnyModel::Voting(_) => "voting",
        }
    }

    /// Feature names the model was fitted on, when it records them.
    pub fn feature_names(&self) -> Option<&[String]> {
        match self {
            AnyModel::Dt(t) => Some(&t.feature_names),
            AnyModel::Rf(f) => f.trees.first().map(|t| t.feature_names.as_slice()),
            AnyModel::Gboost(b) | AnyModel::Xgb(b) => Some(&b.feature_names),
            AnyModel::Adaboost(a) => a.stumps.first().map(|(t, _)| t.feature_names.as_slice()),
            AnyModel::Logistic(_) => None,
            AnyModel::Stacked(s) => s
                .base_models
                .first()
                .and_then(|m| AnyModelRef(m).feature_names()),
            AnyModel::Voting(v) => v
                .members
                .first()
                .and_then(|m| AnyModelRef(m).feature_names()),
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        match self {
            AnyModel::Dt(m) => m.predict_proba(x),
            AnyModel::Rf(m) => m.predict_proba(x),
            AnyModel::Gboost(m) | AnyModel::Xgb(m) => m.predict_proba(x),
            AnyModel::Adaboost(m) => m.predict_proba(x),
            AnyModel::Logistic(m) => m.predict_proba(x),
            AnyModel::Stacked(m) => predict_stacked(m, x),
            AnyModel::Voting(m) => Ok(predict_voting(m, x)?.1),
        }
    }

    /// Hard label; voting models apply their own vote rule.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        match self {
            AnyModel::Voting(m) => Ok(predict_voting(m, x)?.0),
            other => Ok(hard_label(other.predict_proba(x)?)),
        }
    }

    pub fn predict_proba_batch(&self, d: &Dataset) -> Result<Vec<f64>> {
        (0..d.n_rows())
            .map(|i| self.predict_proba(d.row(i)))
            .collect()
    }

    pub fn predict_batch(&self, d: &Dataset) -> Result<Vec<u8>> {
        (0..d.n_rows()).map(|i| self.predict(d.row(i))).collect()
    }
}

struct AnyModelRef<'a>(&'a FittedModel);

impl<'a> AnyModelRef<'a> {
    fn feature_names(&self) -> Option<&'a [String]> {
        match self.0 {
            FittedModel::DecisionTree(t) => Some(&t.feature_names),
            FittedModel::RandomForest(f) => f.trees.first().map(|t| t.feature_names.as_slice()),
            FittedModel::GradientBoost(b) | FittedModel::Xgboost(b) => Some(&b.feature_names),
            FittedModel::AdaBoost(a) => a.stumps.first().map(|(t, _)| t.feature_names.as_slice()),
            FittedModel::Logistic(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub created_with: String,
    pub seed: u64,
    pub model: AnyModel,
}

impl ModelFile {
    pub fn new(model: AnyModel, seed: u64) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            created_with: format!("txanomaly {}", env!("CARGO_PKG_VERSION")),
            seed,
            model,
        }
    }
}

pub fn save_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: file.format_version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    Ok(file)
}

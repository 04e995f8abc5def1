//! Two-class AdaBoost (SAMME) over weighted decision stumps.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::tree::{fit_tree_on, TreeModel, TreeParams};
use crate::learners::{clamp_probability, hard_label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaBoostParams {
    pub n_rounds: usize,
    pub stump_depth: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            n_rounds: 50,
            stump_depth: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<(TreeModel, f64)>,
    /// Training positive prior; returned when no round survived.
    pub fallback: f64,
}

// Stand-in error for a perfect round; alpha = ln((1-eps)/eps).
const PERFECT_EPS: f64 = 1e-16;

/// Fitted rounds plus the post-normalization weight sums, for auditing.
type Rounds = (Vec<(TreeModel, f64)>, Vec<f64>);

pub(crate) fn boost_rounds(train: &Dataset, params: &AdaBoostParams) -> Result<Rounds> {
    let n = train.n_rows();
    let (neg, pos) = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }
    let stump_params = TreeParams {
        max_depth: params.stump_depth,
        min_samples_leaf: 1,
        min_impurity_decrease: 0.0,
    };
    let rows: Vec<usize> = (0..n).collect();
    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut weight_sums = Vec::new();

    for _ in 0..params.n_rounds {
        let stump = fit_tree_on(train, &stump_params, rows.clone(), Some(&weights), None)?;
        let misclassified: Vec<bool> = (0..n)
            .map(|i| hard_label(stump.predict_proba(train.row(i)).unwrap()) != train.label(i))
            .collect();
        let err: f64 = weights
            .iter()
            .zip(&misclassified)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum();

        if err == 0.0 {
            let alpha = ((1.0 - PERFECT_EPS) / PERFECT_EPS).ln();
            stumps.push((stump, alpha));
            weight_sums.push(weights.iter().sum());
            break;
        }
        if err >= 0.5 {
            break;
        }
        let alpha = ((1.0 - err) / err).ln();
        for (w, &m) in weights.iter_mut().zip(&misclassified) {
            if m {
                *w *= alpha.exp();
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        stumps.push((stump, alpha));
        weight_sums.push(weights.iter().sum());
    }
    Ok((stumps, weight_sums))
}

pub fn fit_adaboost(train: &Dataset, params: &AdaBoostParams) -> Result<AdaBoostModel> {
    let (stumps, _) = boost_rounds(train, params)?;
    let (neg, pos) = train.class_counts();
    Ok(AdaBoostModel {
        stumps,
        fallback: pos as f64 / (neg + pos) as f64,
    })
}

impl AdaBoostModel {
    /// Alpha-weighted fraction of rounds voting positive.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if self.stumps.is_empty() {
            return Ok(clamp_probability(self.fallback));
        }
        let mut voted = 0.0;
        let mut total = 0.0;
        for (stump, alpha) in &self.stumps {
            let p = stump.predict_proba(x)?;
            if hard_label(p) == 1 {
                voted += alpha;
            }
            total += alpha;
        }
        Ok(voted / total)
    }
}

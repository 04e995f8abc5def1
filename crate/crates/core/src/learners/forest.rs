//! Bagged trees with per-split feature subsampling. Bootstrap draws are
//! made over a content-sorted row ordering, so a fitted forest depends on
//! the seed and the data but not on the order rows arrive in.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::tree::{fit_tree_on, TreeModel, TreeParams};
use crate::rng::{derive_seed, seeded_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per split; `None` means `floor(sqrt(D))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 10,
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub bootstrap_seeds: Vec<u64>,
}

/// Lexicographic content order over (row values, label); the bootstrap
/// indexes into this ordering.
fn canonical_order(train: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (train.row(a), train.row(b));
        for (x, y) in ra.iter().zip(rb) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        train.label(a).cmp(&train.label(b))
    });
    order
}

pub fn fit_forest(train: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be >= 1".to_string()));
    }
    let d = train.n_features();
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1));
    if mtry == 0 || mtry > d {
        return Err(Error::InvalidParameter(format!(
            "features_per_split must be in 1..={d}, got {mtry}"
        )));
    }
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        min_impurity_decrease: 0.0,
    };
    let order = canonical_order(train);
    let n = train.n_rows();

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut bootstrap_seeds = Vec::with_capacity(params.n_trees);
    for t in 0..params.n_trees {
        let tree_seed = derive_seed(seed, &format!("tree/{t}"));
        bootstrap_seeds.push(tree_seed);
        let mut rng = seeded_rng(tree_seed);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| order[rng.random_range(0..n)]).collect()
        } else {
            (0..n).collect()
        };
        let tree = fit_tree_on(train, &tree_params, rows, None, Some((mtry, &mut rng)))?;
        trees.push(tree);
    }
    Ok(ForestModel {
        trees,
        bootstrap_seeds,
    })
}

impl ForestModel {
    /// Mean of the member leaf probabilities.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict_proba(x)?;
        }
        Ok(sum / self.trees.len() as f64)
    }
}

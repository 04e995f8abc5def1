//! CART-style binary classification tree with exact greedy split search:
//! every feature, every midpoint between consecutive distinct sorted
//! values, best Gini decrease wins, ties broken by lower feature index
//! then lower threshold.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Gini impurity of a two-class count pair: `1 - p0^2 - p1^2`.
pub fn gini(counts: [usize; 2]) -> Result<f64> {
    if counts[0] == 0 && counts[1] == 0 {
        return Err(Error::EmptyCounts);
    }
    Ok(gini_weighted(counts[0] as f64, counts[1] as f64))
}

fn gini_weighted(neg: f64, pos: f64) -> f64 {
    let n = neg + pos;
    let pn = neg / n;
    let pp = pos / n;
    1.0 - pn * pn - pp * pp
}

/// Flat tree node; children are indices into the model's node array.
/// Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        class_counts: [usize; 2],
        impurity: f64,
    },
    Leaf {
        class_counts: [usize; 2],
        predicted_probability: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub feature_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// A split must achieve a strictly positive Gini decrease of at least
    /// this much (decrease is weighted within the node).
    pub min_impurity_decrease: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 10,
            min_samples_leaf: 1,
            min_impurity_decrease: 0.0,
        }
    }
}

struct Grower<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    weights: Option<&'a [f64]>,
    subsample: Option<(usize, &'a mut ChaCha8Rng)>,
    nodes: Vec<Node>,
}

struct BestSplit {
    decrease: f64,
    feature: usize,
    threshold: f64,
}

impl<'a> Grower<'a> {
    fn weight(&self, row: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[row])
    }

    fn node_stats(&self, rows: &[usize]) -> ([usize; 2], [f64; 2]) {
        let mut counts = [0usize; 2];
        let mut wsum = [0.0f64; 2];
        for &i in rows {
            let l = self.data.label(i) as usize;
            counts[l] += 1;
            wsum[l] += self.weight(i);
        }
        (counts, wsum)
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match &mut self.subsample {
            Some((mtry, rng)) if *mtry < d => {
                let mut picked: Vec<usize> = sample(rng, d, *mtry).into_iter().collect();
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }

    fn find_split(&mut self, rows: &[usize], parent_impurity: f64) -> Option<BestSplit> {
        let min_leaf = self.params.min_samples_leaf;
        if rows.len() < 2 * min_leaf {
            return None;
        }
        let n_rows = rows.len();
        let mut best: Option<BestSplit> = None;

        for feature in self.candidate_features() {
            // Sort by (value, label, weight) so prefix sums do not depend
            // on the incoming row order.
            let mut cells: Vec<(f64, u8, f64)> = rows
                .iter()
                .map(|&i| {
                    (
                        self.data.row(i)[feature],
                        self.data.label(i),
                        self.weight(i),
                    )
                })
                .collect();
            cells.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.cmp(&b.1))
                    .then(a.2.total_cmp(&b.2))
            });

            let total_w: [f64; 2] = cells.iter().fold([0.0, 0.0], |mut acc, c| {
                acc[c.1 as usize] += c.2;
                acc
            });
            let total = total_w[0] + total_w[1];

            let mut left_w = [0.0f64; 2];
            for pos in 1..n_rows {
                let prev = &cells[pos - 1];
                left_w[prev.1 as usize] += prev.2;
                if cells[pos].0 == prev.0 {
                    continue;
                }
                if pos < min_leaf || n_rows - pos < min_leaf {
                    continue;
                }
                let threshold = (prev.0 + cells[pos].0) / 2.0;
                let right_w = [total_w[0] - left_w[0], total_w[1] - left_w[1]];
                let wl = left_w[0] + left_w[1];
                let wr = right_w[0] + right_w[1];
                let decrease = parent_impurity
                    - (wl / total) * gini_weighted(left_w[0], left_w[1])
                    - (wr / total) * gini_weighted(right_w[0], right_w[1]);
                let better = match &best {
                    None => true,
                    Some(b) => decrease > b.decrease,
                };
                if better {
                    best = Some(BestSplit {
                        decrease,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best.filter(|b| b.decrease > 0.0 && b.decrease >= self.params.min_impurity_decrease)
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (counts, wsum) = self.node_stats(&rows);
        let impurity = gini_weighted(wsum[0], wsum[1]);
        let probability = wsum[1] / (wsum[0] + wsum[1]);

        let split = if depth < self.params.max_depth && counts[0] > 0 && counts[1] > 0 {
            self.find_split(&rows, impurity)
        } else {
            None
        };

        match split {
            None => {
                self.nodes.push(Node::Leaf {
                    class_counts: counts,
                    predicted_probability: probability,
                });
                self.nodes.len() - 1
            }
            Some(s) => {
                let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
                for &i in &rows {
                    if self.data.row(i)[s.feature] <= s.threshold {
                        left_rows.push(i);
                    } else {
                        right_rows.push(i);
                    }
                }
                let me = self.nodes.len();
                self.nodes.push(Node::Leaf {
                    class_counts: counts,
                    predicted_probability: probability,
                });
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[me] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                    n_samples: rows.len(),
                    class_counts: counts,
                    impurity,
                };
                me
            }
        }
    }
}

/// Grows a tree on a row subset, optionally weighted and with per-split
/// feature subsampling (used by the forest and by AdaBoost).
pub(crate) fn fit_tree_on(
    train: &Dataset,
    params: &TreeParams,
    rows: Vec<usize>,
    weights: Option<&[f64]>,
    subsample: Option<(usize, &mut ChaCha8Rng)>,
) -> Result<TreeModel> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut grower = Grower {
        data: train,
        params,
        weights,
        subsample,
        nodes: Vec::new(),
    };
    let root = grower.build(rows, 0);
    debug_assert_eq!(root, 0);
    Ok(TreeModel {
        nodes: grower.nodes,
        max_depth: params.max_depth,
        feature_names: train.columns().to_vec(),
    })
}

/// Fits a classification tree on the full dataset.
pub fn fit_tree(train: &Dataset, params: &TreeParams) -> Result<TreeModel> {
    fit_tree_on(train, params, (0..train.n_rows()).collect(), None, None)
}

impl TreeModel {
    /// Positive-class probability at the leaf reached by `x`. Values equal
    /// to a threshold go left.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                found: x.len(),
            });
        }
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf {
                    predicted_probability,
                    ..
                } => return Ok(*predicted_probability),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    /// Longest root-to-leaf path, counted in split edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

//! Stage-wise boosted trees over logistic loss. Two flavours share the
//! machinery: classic gradient boosting (variance-reduction splits on the
//! residuals, Newton leaf values) and the regularized second-order booster
//! (gain and leaf weights from gradient/hessian sums with L2 `lambda` and
//! split penalty `gamma`).

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{clamp_probability, log_loss, logistic_grad_hess, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// One regression stage; children are node-array indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                RegNode::Leaf { value } => return *value,
                RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
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
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostFlavor {
    Gradient,
    Xgboost,
}

/// Additive model: `probability = sigmoid(base_score + learning_rate * sum(stages))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub stages: Vec<RegTree>,
    pub learning_rate: f64,
    pub base_score: f64,
    pub feature_names: Vec<String>,
    pub flavor: BoostFlavor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GboostParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GboostParams {
    fn default() -> Self {
        GboostParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XgbParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

impl Default for XgbParams {
    fn default() -> Self {
        XgbParams {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: 3,
            lambda: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
        }
    }
}

/// Second-order split gain:
/// `0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - (GL+GR)^2/(HL+HR+lambda)) - gamma`.
pub fn xgb_split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda)
        - (gl + gr) * (gl + gr) / (hl + hr + lambda))
        - gamma
}

enum GainMode {
    /// Variance reduction on the residuals; equivalent to the gain above
    /// with unit hessians and no regularization.
    Variance { min_samples_leaf: usize },
    Xgb {
        lambda: f64,
        gamma: f64,
        min_child_weight: f64,
    },
}

struct StageGrower<'a> {
    data: &'a Dataset,
    grad: &'a [f64],
    hess: &'a [f64],
    mode: &'a GainMode,
    max_depth: usize,
    nodes: Vec<RegNode>,
}

impl<'a> StageGrower<'a> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        let denom = match self.mode {
            GainMode::Variance { .. } => h.max(1e-12),
            GainMode::Xgb { lambda, .. } => h + lambda,
        };
        if denom <= 0.0 {
            0.0
        } else {
            -g / denom
        }
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        // Accumulate in sorted order so node totals are a function of the
        // row contents, not of the order rows arrived in.
        let mut pairs: Vec<(f64, f64)> =
            rows.iter().map(|&i| (self.grad[i], self.hess[i])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut g_sum = 0.0;
        let mut h_sum = 0.0;
        for (g, h) in pairs {
            g_sum += g;
            h_sum += h;
        }

        let split = if depth < self.max_depth && rows.len() >= 2 {
            self.find_split(&rows, g_sum, h_sum)
        } else {
            None
        };

        match split {
            None => {
                self.nodes.push(RegNode::Leaf {
                    value: self.leaf_value(g_sum, h_sum),
                });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
                for &i in &rows {
                    if self.data.row(i)[feature] <= threshold {
                        left_rows.push(i);
                    } else {
                        right_rows.push(i);
                    }
                }
                let me = self.nodes.len();
                self.nodes.push(RegNode::Leaf { value: 0.0 });
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[me] = RegNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                me
            }
        }
    }

    fn find_split(&self, rows: &[usize], g_total: f64, h_total: f64) -> Option<(usize, f64)> {
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for feature in 0..self.data.n_features() {
            let mut cells: Vec<(f64, f64, f64)> = rows
                .iter()
                .map(|&i| (self.data.row(i)[feature], self.grad[i], self.hess[i]))
                .collect();
            cells.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.total_cmp(&b.1))
                    .then(a.2.total_cmp(&b.2))
            });

            let mut gl = 0.0;
            let mut hl = 0.0;
            for pos in 1..n {
                let prev = &cells[pos - 1];
                gl += prev.1;
                hl += prev.2;
                if cells[pos].0 == prev.0 {
                    continue;
                }
                let gr = g_total - gl;
                let hr = h_total - hl;
                let gain = match self.mode {
                    GainMode::Variance { min_samples_leaf } => {
                        if pos < *min_samples_leaf || n - pos < *min_samples_leaf {
                            continue;
                        }
                        let nl = pos as f64;
                        let nr = (n - pos) as f64;
                        gl * gl / nl + gr * gr / nr - g_total * g_total / n as f64
                    }
                    GainMode::Xgb {
                        lambda,
                        gamma,
                        min_child_weight,
                    } => {
                        if hl < *min_child_weight || hr < *min_child_weight {
                            continue;
                        }
                        xgb_split_gain(gl, hl, gr, hr, *lambda, *gamma)
                    }
                };
                if gain <= 0.0 {
                    continue;
                }
                let threshold = (prev.0 + cells[pos].0) / 2.0;
                let better = match &best {
                    None => true,
                    Some(b) => gain > b.0,
                };
                if better {
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn boost(
    train: &Dataset,
    n_stages: usize,
    learning_rate: f64,
    max_depth: usize,
    mode: GainMode,
    flavor: BoostFlavor,
) -> Result<BoostedModel> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let (neg, pos) = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }
    let prior = clamp_probability(pos as f64 / (neg + pos) as f64);
    let base_score = (prior / (1.0 - prior)).ln();

    let n = train.n_rows();
    let mut margins = vec![base_score; n];
    let mut stages = Vec::with_capacity(n_stages);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..n_stages {
        for (i, (g, h)) in grad.iter_mut().zip(hess.iter_mut()).enumerate() {
            (*g, *h) = logistic_grad_hess(margins[i], train.label(i));
        }
        let mut grower = StageGrower {
            data: train,
            grad: &grad,
            hess: &hess,
            mode: &mode,
            max_depth,
            nodes: Vec::new(),
        };
        grower.build((0..n).collect(), 0);
        let tree = RegTree {
            nodes: grower.nodes,
        };
        for (i, z) in margins.iter_mut().enumerate() {
            *z += learning_rate * tree.predict(train.row(i));
        }
        stages.push(tree);
    }
    Ok(BoostedModel {
        stages,
        learning_rate,
        base_score,
        feature_names: train.columns().to_vec(),
        flavor,
    })
}

/// Classic gradient boosting: trees fit to the negative gradients with
/// variance-reduction splits and Newton leaf values.
pub fn fit_gboost(train: &Dataset, params: &GboostParams) -> Result<BoostedModel> {
    boost(
        train,
        params.n_stages,
        params.learning_rate,
        params.max_depth,
        GainMode::Variance {
            min_samples_leaf: params.min_samples_leaf,
        },
        BoostFlavor::Gradient,
    )
}

/// Regularized second-order booster; splits with non-positive gain are
/// pruned and leaf weights are `-G / (H + lambda)`.
pub fn fit_xgb(train: &Dataset, params: &XgbParams) -> Result<BoostedModel> {
    boost(
        train,
        params.n_stages,
        params.learning_rate,
        params.max_depth,
        GainMode::Xgb {
            lambda: params.lambda,
            gamma: params.gamma,
            min_child_weight: params.min_child_weight,
        },
        BoostFlavor::Xgboost,
    )
}

impl BoostedModel {
    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                found: x.len(),
            });
        }
        let mut z = self.base_score;
        for stage in &self.stages {
            z += self.learning_rate * stage.predict(x);
        }
        Ok(z)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.margin(x)?))
    }
}

/// Training log-loss after each stage prefix (index 0 = base score only).
pub fn staged_log_loss(model: &BoostedModel, d: &Dataset) -> Result<Vec<f64>> {
    let n = d.n_rows();
    let mut margins: Vec<f64> = vec![model.base_score; n];
    let mut out = Vec::with_capacity(model.stages.len() + 1);
    let probs: Vec<f64> = margins.iter().map(|&z| sigmoid(z)).collect();
    out.push(log_loss(&probs, d.labels()));
    for stage in &model.stages {
        for (i, z) in margins.iter_mut().enumerate() {
            *z += model.learning_rate * stage.predict(d.row(i));
        }
        let probs: Vec<f64> = margins.iter().map(|&z| sigmoid(z)).collect();
        out.push(log_loss(&probs, d.labels()));
    }
    Ok(out)
}

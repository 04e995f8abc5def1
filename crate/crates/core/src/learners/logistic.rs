//! L2-regularized logistic regression fit by damped Newton iterations;
//! the bias is not penalized.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::sigmoid;
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub max_iters: usize,
    pub tolerance: f64,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            max_iters: 100,
            tolerance: 1e-8,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Mean logistic loss plus the L2 penalty, with its gradient over
/// `(weights, bias)` packed as `[w_0..w_D-1, b]`.
pub(crate) fn objective_and_gradient(
    d: &Dataset,
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = d.n_rows() as f64;
    let dim = d.n_features();
    let mut loss = 0.0;
    let mut grad = vec![0.0; dim + 1];
    for i in 0..d.n_rows() {
        let x = d.row(i);
        let z = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + bias;
        let y = d.label(i) as f64;
        // log(1 + e^-|z|) form keeps the loss finite at extreme margins.
        loss += if z >= 0.0 {
            (1.0 + (-z).exp()).ln() + z * (1.0 - y)
        } else {
            (1.0 + z.exp()).ln() - z * y
        };
        let residual = sigmoid(z) - y;
        for (g, a) in grad.iter_mut().zip(x) {
            *g += residual * a;
        }
        grad[dim] += residual;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    (loss + penalty, grad)
}

fn newton_system(d: &Dataset, weights: &[f64], bias: f64, l2: f64) -> Vec<f64> {
    let n = d.n_rows() as f64;
    let dim = d.n_features() + 1;
    let mut h = vec![0.0; dim * dim];
    for i in 0..d.n_rows() {
        let x = d.row(i);
        let z = x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + bias;
        let p = sigmoid(z);
        let s = p * (1.0 - p);
        for a in 0..dim {
            let xa = if a == dim - 1 { 1.0 } else { x[a] };
            for b in a..dim {
                let xb = if b == dim - 1 { 1.0 } else { x[b] };
                h[a * dim + b] += s * xa * xb;
            }
        }
    }
    for a in 0..dim {
        for b in a..dim {
            h[a * dim + b] /= n;
            h[b * dim + a] = h[a * dim + b];
        }
    }
    for a in 0..dim - 1 {
        h[a * dim + a] += l2;
    }
    h
}

fn grad_norm(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

pub fn fit_logistic(train: &Dataset, params: &LogisticParams) -> Result<LogisticModel> {
    let (neg, pos) = train.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass);
    }
    let dim = train.n_features();
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let (mut loss, mut grad) = objective_and_gradient(train, &weights, bias, params.l2);

    for iter in 0..params.max_iters {
        if grad_norm(&grad) < params.tolerance {
            return Ok(LogisticModel { weights, bias });
        }
        let hess = newton_system(train, &weights, bias, params.l2);
        let step = linalg::solve(hess, grad.clone())?;

        // Damping: halve the step until the objective improves.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand_w: Vec<f64> = weights
                .iter()
                .zip(&step)
                .map(|(w, s)| w - scale * s)
                .collect();
            let cand_b = bias - scale * step[dim];
            let (cand_loss, cand_grad) = objective_and_gradient(train, &cand_w, cand_b, params.l2);
            if cand_loss <= loss {
                weights = cand_w;
                bias = cand_b;
                loss = cand_loss;
                grad = cand_grad;
                accepted = true;
                break;
            }
            scale /= 2.0;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                gradient_norm: grad_norm(&grad),
                iterations: iter + 1,
            });
        }
    }
    if grad_norm(&grad) < params.tolerance {
        return Ok(LogisticModel { weights, bias });
    }
    Err(Error::NonConvergence {
        gradient_norm: grad_norm(&grad),
        iterations: params.max_iters,
    })
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: x.len(),
            });
        }
        let z = x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias;
        Ok(sigmoid(z))
    }
}

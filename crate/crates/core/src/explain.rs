//! KernelSHAP attribution for any probability-valued model function.
//!
//! Coalitions are enumerated exhaustively whenever `2^D` is small enough
//! (always true for the six-feature transaction schema) and sampled from
//! the Shapley kernel otherwise. Absent features are integrated out by
//! replacing them with every background row in turn and averaging. The
//! empty and full coalitions enter as hard constraints, so the efficiency
//! identity `base_value + sum(phi) = f(x)` holds by construction.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::seeded_rng;

use rand::seq::index::sample;
use rand::Rng;

/// Exhaustive enumeration is used while `2^D` stays at or below this.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

/// Per-instance attribution: `base_value + sum(phis) == fx` within solver
/// tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionVector {
    pub base_value: f64,
    pub phis: Vec<f64>,
    pub fx: f64,
}

/// Mean absolute attribution per feature, sorted nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub entries: Vec<(String, f64)>,
}

/// Plot-data record behind a force plot: per-feature name, raw value, and
/// attribution, ordered by |phi| descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceRecord {
    pub base_value: f64,
    pub fx: f64,
    pub features: Vec<ForceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceEntry {
    pub name: String,
    pub value: f64,
    pub phi: f64,
}

/// Background set for the explainer: up to `size` rows drawn without
/// replacement, split across the classes in proportion to their frequency
/// (at least one row per present class).
pub fn background_sample(d: &Dataset, size: usize, seed: u64) -> Dataset {
    use rand::seq::SliceRandom;
    if size >= d.n_rows() {
        return d.clone();
    }
    let mut rng = seeded_rng(seed);
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for label in [0u8, 1u8] {
        let mut idx = d.class_indices(label);
        if idx.is_empty() {
            continue;
        }
        let share = (size as f64 * idx.len() as f64 / d.n_rows() as f64).round() as usize;
        let take = share
            .clamp(1, idx.len())
            .min(size.saturating_sub(keep.len()).max(1));
        idx.shuffle(&mut rng);
        keep.extend_from_slice(&idx[..take]);
    }
    keep.sort_unstable();
    keep.truncate(size);
    d.subset(&keep)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Shapley kernel weight for a coalition of size `s` out of `d` features.
fn kernel_weight(d: usize, s: usize) -> f64 {
    (d - 1) as f64 / (binomial(d, s) * (s * (d - s)) as f64)
}

/// Mean model output with the coalition's absent features replaced by each
/// background row in turn.
fn coalition_value(
    model_fn: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    background: &Dataset,
    mask: &[bool],
    scratch: &mut Vec<f64>,
) -> f64 {
    let mut total = 0.0;
    for b in 0..background.n_rows() {
        let row = background.row(b);
        scratch.clear();
        scratch.extend(
            mask.iter()
                .zip(x)
                .zip(row)
                .map(|((&m, &xv), &bv)| if m { xv } else { bv }),
        );
        total += model_fn(scratch);
    }
    total / background.n_rows() as f64
}

/// KernelSHAP attribution of `model_fn` at `x` against a background set.
pub fn kernel_shap(
    model_fn: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    background: &Dataset,
    n_coalitions: usize,
    seed: u64,
) -> Result<AttributionVector> {
    let d = x.len();
    if background.n_rows() == 0 {
        return Err(Error::EmptyBackground);
    }
    if background.n_features() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: background.n_features(),
        });
    }
    let fx = model_fn(x);
    let mut scratch = Vec::with_capacity(d);
    let base_value = coalition_value(model_fn, x, background, &vec![false; d], &mut scratch);

    if d == 1 {
        return Ok(AttributionVector {
            base_value,
            phis: vec![fx - base_value],
            fx,
        });
    }

    let exhaustive =
        d < usize::BITS as usize && (1usize << d) <= EXHAUSTIVE_LIMIT.max(n_coalitions);
    let mut masks: Vec<Vec<bool>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    if exhaustive {
        for bits in 1..(1usize << d) - 1 {
            let mask: Vec<bool> = (0..d).map(|j| bits >> j & 1 == 1).collect();
            let s = mask.iter().filter(|&&m| m).count();
            masks.push(mask);
            weights.push(kernel_weight(d, s));
        }
    } else {
        if n_coalitions < d + 2 {
            return Err(Error::InsufficientCoalitions {
                have: n_coalitions,
                need: d + 2,
            });
        }
        // Sample sizes proportionally to the kernel mass at each size,
        // then a uniform subset of that size; sampled coalitions then
        // enter the regression unweighted.
        let size_mass: Vec<f64> = (1..d).map(|s| 1.0 / (s * (d - s)) as f64).collect();
        let total_mass: f64 = size_mass.iter().sum();
        let mut rng = seeded_rng(seed);
        for _ in 0..n_coalitions {
            let mut pick = rng.random::<f64>() * total_mass;
            let mut size = 1usize;
            for (i, m) in size_mass.iter().enumerate() {
                if pick < *m {
                    size = i + 1;
                    break;
                }
                pick -= m;
                size = i + 1;
            }
            let mut mask = vec![false; d];
            for i in sample(&mut rng, d, size) {
                mask[i] = true;
            }
            masks.push(mask);
            weights.push(1.0);
        }
    }

    // Eliminate phi_{d-1} through the efficiency constraint and solve the
    // weighted normal equations for the rest.
    let span = fx - base_value;
    let unknowns = d - 1;
    let mut normal = vec![0.0; unknowns * unknowns];
    let mut rhs = vec![0.0; unknowns];
    let mut features = vec![0.0; unknowns];
    for (mask, w) in masks.iter().zip(&weights) {
        let v = coalition_value(model_fn, x, background, mask, &mut scratch);
        let last = if mask[d - 1] { 1.0 } else { 0.0 };
        let y = v - base_value - last * span;
        for j in 0..unknowns {
            features[j] = (if mask[j] { 1.0 } else { 0.0 }) - last;
        }
        for j in 0..unknowns {
            if features[j] == 0.0 {
                continue;
            }
            let wj = w * features[j];
            for k in j..unknowns {
                normal[j * unknowns + k] += wj * features[k];
            }
            rhs[j] += wj * y;
        }
    }
    for j in 0..unknowns {
        for k in 0..j {
            normal[j * unknowns + k] = normal[k * unknowns + j];
        }
    }
    let head = linalg::solve(normal, rhs).map_err(|_| Error::InsufficientCoalitions {
        have: masks.len(),
        need: d + 2,
    })?;
    let mut phis = head;
    let tail = span - phis.iter().sum::<f64>();
    phis.push(tail);
    Ok(AttributionVector {
        base_value,
        phis,
        fx,
    })
}

/// Mean |phi| per feature across instances, sorted nonincreasing (ties
/// keep the feature order).
pub fn global_importance(
    attributions: &[AttributionVector],
    feature_names: &[String],
) -> Result<GlobalImportance> {
    if attributions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = feature_names.len();
    for a in attributions {
        if a.phis.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.phis.len(),
            });
        }
    }
    let mut entries: Vec<(String, f64)> = feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean = attributions.iter().map(|a| a.phis[j].abs()).sum::<f64>()
                / attributions.len() as f64;
            (name.clone(), mean)
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| entries[b].1.total_cmp(&entries[a].1).then(a.cmp(&b)));
    entries = order.into_iter().map(|i| entries[i].clone()).collect();
    Ok(GlobalImportance { entries })
}

/// Assembles the force-plot record for one instance.
pub fn force_record(
    attribution: &AttributionVector,
    feature_names: &[String],
    feature_values: &[f64],
) -> Result<ForceRecord> {
    let d = feature_names.len();
    if attribution.phis.len() != d || feature_values.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: attribution.phis.len().min(feature_values.len()),
        });
    }
    let mut features: Vec<ForceEntry> = (0..d)
        .map(|j| ForceEntry {
            name: feature_names[j].clone(),
            value: feature_values[j],
            phi: attribution.phis[j],
        })
        .collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        features[b]
            .phi
            .abs()
            .total_cmp(&features[a].phi.abs())
            .then(a.cmp(&b))
    });
    features = order.into_iter().map(|i| features[i].clone()).collect();
    Ok(ForceRecord {
        base_value: attribution.base_value,
        fx: attribution.fx,
        features,
    })
}

/// Global importance as CSV plot data.
pub fn importance_csv(importance: &GlobalImportance) -> String {
    let mut out = String::from("feature,mean_abs_shap\n");
    for (name, value) in &importance.entries {
        out.push_str(&format!(
            "{},{}\n",
            name,
            crate::dataset::format_value(*value)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn background(rows: Vec<Vec<f64>>, names: &[&str]) -> Dataset {
        let labels = vec![0u8; rows.len()];
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        Dataset::new(
            names.iter().map(|s| s.to_string()).collect(),
            "label",
            values,
            labels,
        )
        .unwrap()
    }

    fn random_background(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = seeded_rng(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let names: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        background(rows, &refs)
    }

    #[test]
    fn constant_model_gets_zero_phis() {
        let bg = random_background(10, 3, 1);
        let f = |_: &[f64]| 0.7;
        let a = kernel_shap(&f, &[1.0, 2.0, 3.0], &bg, 64, 1).unwrap();
        assert!((a.base_value - a.fx).abs() < 1e-12);
        for phi in &a.phis {
            assert!(phi.abs() < 1e-9);
        }
    }

    #[test]
    fn one_feature_is_exact() {
        let bg = random_background(5, 1, 2);
        let f = |x: &[f64]| 2.0 * x[0] + 1.0;
        let a = kernel_shap(&f, &[3.0], &bg, 16, 1).unwrap();
        assert!((a.phis[0] - (a.fx - a.base_value)).abs() < 1e-12);
    }

    #[test]
    fn linear_model_closed_form() {
        let bg = random_background(20, 3, 3);
        let coefs = [1.0, 2.0, 3.0];
        let f = move |x: &[f64]| x.iter().zip(&coefs).map(|(a, c)| a * c).sum::<f64>();
        let x = [0.5, -1.0, 2.0];
        let a = kernel_shap(&f, &x, &bg, 64, 1).unwrap();
        let means: Vec<f64> = (0..3)
            .map(|j| bg.column(j).iter().sum::<f64>() / bg.n_rows() as f64)
            .collect();
        for j in 0..3 {
            let expected = coefs[j] * (x[j] - means[j]);
            assert!(
                (a.phis[j] - expected).abs() < 1e-6,
                "phi_{j}: {} vs {expected}",
                a.phis[j]
            );
        }
        let total = a.base_value + a.phis.iter().sum::<f64>();
        assert!((total - a.fx).abs() < 1e-6);
    }

    #[test]
    fn symmetry_and_dummy() {
        // Features 0 and 1 are interchangeable; feature 2 is ignored.
        let rows = vec![
            vec![1.0, 1.0, 5.0],
            vec![-1.0, -1.0, 7.0],
            vec![0.5, 0.5, -2.0],
        ];
        let bg = background(rows, &["a", "b", "c"]);
        let f = |x: &[f64]| x[0] + x[1];
        let a = kernel_shap(&f, &[2.0, 2.0, 9.0], &bg, 64, 1).unwrap();
        assert!((a.phis[0] - a.phis[1]).abs() < 1e-9);
        assert!(a.phis[2].abs() < 1e-9);
    }

    #[test]
    fn sampled_mode_keeps_efficiency() {
        // 13 features forces the sampling path at this budget.
        let d = 13;
        let bg = random_background(8, d, 5);
        let f = |x: &[f64]| x.iter().sum::<f64>() / 13.0;
        let x: Vec<f64> = (0..d).map(|j| j as f64 / 7.0).collect();
        let a = kernel_shap(&f, &x, &bg, 400, 9).unwrap();
        let total = a.base_value + a.phis.iter().sum::<f64>();
        assert!((total - a.fx).abs() < 1e-3);
        // Linear model: any identifiable coalition sample recovers the
        // closed form exactly.
        let means: Vec<f64> = (0..d)
            .map(|j| bg.column(j).iter().sum::<f64>() / bg.n_rows() as f64)
            .collect();
        for j in 0..d {
            let expected = (x[j] - means[j]) / 13.0;
            assert!((a.phis[j] - expected).abs() < 1e-6);
        }
        assert!(matches!(
            kernel_shap(&f, &x, &bg, d + 1, 9),
            Err(Error::InsufficientCoalitions { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = 14;
        let bg = random_background(6, d, 8);
        let f = |x: &[f64]| x[0] * x[1] + x[5];
        let x: Vec<f64> = (0..d).map(|j| (j as f64).sin()).collect();
        let a = kernel_shap(&f, &x, &bg, 300, 42).unwrap();
        let b = kernel_shap(&f, &x, &bg, 300, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn global_importance_sorts_by_mean_abs() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        let atts = vec![
            AttributionVector {
                base_value: 0.0,
                phis: vec![0.5, -1.0],
                fx: -0.5,
            },
            AttributionVector {
                base_value: 0.0,
                phis: vec![-0.5, 1.0],
                fx: 0.5,
            },
        ];
        let g = global_importance(&atts, &names).unwrap();
        // Opposite signs do not cancel: means are |phi|.
        assert_eq!(g.entries[0], ("b".to_string(), 1.0));
        assert_eq!(g.entries[1], ("a".to_string(), 0.5));
    }

    #[test]
    fn force_record_orders_by_magnitude() {
        let a = AttributionVector {
            base_value: 0.4,
            phis: vec![0.1, -0.3, 0.05],
            fx: 0.25,
        };
        let names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        let rec = force_record(&a, &names, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rec.features[0].name, "y");
        assert_eq!(rec.features[2].name, "z");
        let sum: f64 = rec.features.iter().map(|f| f.phi).sum();
        assert!((rec.base_value + sum - rec.fx).abs() < 1e-12);
    }
}

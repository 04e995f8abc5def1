//! Confusion-matrix accounting, the four headline rates, and ROC/AUC.
//! Rates with an empty denominator are reported as explicitly undefined
//! (`None`), never silently zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_pos: usize,
    #[serde(rename = "fn")]
    pub false_neg: usize,
    #[serde(rename = "fp")]
    pub false_pos: usize,
    #[serde(rename = "tn")]
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }
}

/// Accuracy, TPR/sensitivity, TNR/specificity, and FPR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub accuracy: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub fpr: Option<f64>,
}

/// Exact confusion counts for binary labels and predictions.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.iter().chain(y_pred).any(|&v| v > 1) {
        return Err(Error::NonBinaryLabel);
    }
    let mut cm = ConfusionMatrix {
        true_pos: 0,
        false_neg: 0,
        false_pos: 0,
        true_neg: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_pos += 1,
            (1, 0) => cm.false_neg += 1,
            (0, 1) => cm.false_pos += 1,
            (0, 0) => cm.true_neg += 1,
            _ => unreachable!(),
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Derives the four rates from confusion counts.
pub fn rates(cm: &ConfusionMatrix) -> Rates {
    let pos = cm.true_pos + cm.false_neg;
    let neg = cm.true_neg + cm.false_pos;
    Rates {
        accuracy: ratio(cm.true_pos + cm.true_neg, cm.total()),
        tpr: ratio(cm.true_pos, pos),
        tnr: ratio(cm.true_neg, neg),
        fpr: ratio(cm.false_pos, neg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC sweep from (0,0) to (1,1). `thresholds[i]` is the score cutoff
/// that produces `points[i]`; the origin carries +inf.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub thresholds: Vec<f64>,
}

/// Threshold sweep over the unique scores in descending order, with tied
/// scores grouped into a single step; AUC by the trapezoid rule (tied
/// groups therefore earn half credit).
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<(RocCurve, f64)> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    if y_true.iter().any(|&v| v > 1) {
        return Err(Error::NonBinaryLabel);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore);
    }
    let pos = y_true.iter().filter(|&&v| v == 1).count();
    let neg = y_true.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let mut j = i;
        while j < order.len() && scores[order[j]] == threshold {
            if y_true[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let prev = *points.last().unwrap();
        let next = RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
        points.push(next);
        thresholds.push(threshold);
        i = j;
    }
    Ok((RocCurve { points, thresholds }, auc))
}

/// One grid cell of an experiment report: a (sampler, model) pair with its
/// rates, AUC, and raw confusion counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsRow {
    pub sampler: String,
    pub model: String,
    pub accuracy: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub fpr: Option<f64>,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
}

fn format_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "undefined".to_string(),
    }
}

/// Long-form CSV: one line per (sampler, model) cell.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("sampler,model,accuracy,tpr,tnr,fpr,auc,tp,fn,fp,tn\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{},{},{},{}\n",
            r.sampler,
            r.model,
            format_cell(r.accuracy),
            format_cell(r.tpr),
            format_cell(r.tnr),
            format_cell(r.fpr),
            r.auc,
            r.confusion.true_pos,
            r.confusion.false_neg,
            r.confusion.false_pos,
            r.confusion.true_neg,
        ));
    }
    out
}

/// Wide-form CSV shaped like the comparison tables: one row per model,
/// one column per sampler, cells holding the chosen metric.
pub fn grid_csv(rows: &[MetricsRow], metric: &str) -> Result<String> {
    let mut samplers: Vec<&str> = Vec::new();
    let mut models: Vec<&str> = Vec::new();
    for r in rows {
        if !samplers.contains(&r.sampler.as_str()) {
            samplers.push(&r.sampler);
        }
        if !models.contains(&r.model.as_str()) {
            models.push(&r.model);
        }
    }
    let pick = |r: &MetricsRow| -> Result<Option<f64>> {
        Ok(match metric {
            "accuracy" => r.accuracy,
            "tpr" => r.tpr,
            "tnr" => r.tnr,
            "fpr" => r.fpr,
            "auc" => Some(r.auc),
            other => return Err(Error::InvalidParameter(format!("unknown metric '{other}'"))),
        })
    };
    let mut out = format!("model,{}\n", samplers.join(","));
    for m in &models {
        out.push_str(m);
        for s in &samplers {
            let cell = rows
                .iter()
                .find(|r| r.model == *m && r.sampler == *s)
                .map(&pick)
                .transpose()?
                .flatten();
            out.push(',');
            out.push_str(&format_cell(cell));
        }
        out.push('\n');
    }
    Ok(out)
}

/// ROC points as plot data.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for (p, t) in curve.points.iter().zip(&curve.thresholds) {
        let t_str = if t.is_infinite() {
            "inf".to_string()
        } else {
            crate::dataset::format_value(*t)
        };
        out.push_str(&format!(
            "{},{},{}\n",
            t_str,
            crate::dataset::format_value(p.fpr),
            crate::dataset::format_value(p.tpr)
        ));
    }
    out
}

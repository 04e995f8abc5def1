//! The XGBCLUS under-sampler: repeatedly draw a majority subset the size
//! of the minority class, fit a boosted model on the candidate balanced
//! set, score it on an evaluation split, and keep the subset whenever it
//! strictly raises the true positives while strictly lowering the false
//! positives. The last accepted subset joins the minority rows as the
//! returned sample.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{fit_xgb, hard_label, XgbParams};
use crate::rng::seeded_rng;
use crate::sampling::minority_label;

/// Thresholds and the internal booster configuration.
///
/// The defaults (`tmax0 = -1`, `fmin0 = i64::MAX`) make the first
/// iteration always acceptable, so the selection cannot come back empty.
/// Tighter values reproduce the retry-with-new-thresholds behaviour: if
/// nothing beats them the run fails with a distinct error instead of
/// looping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XgbclusConfig {
    pub tmax0: i64,
    pub fmin0: i64,
    pub booster: XgbParams,
    /// Optional cap on the iteration count; `None` uses
    /// `floor(majority / minority)` as described for the algorithm.
    pub max_iterations: Option<usize>,
}

impl Default for XgbclusConfig {
    fn default() -> Self {
        XgbclusConfig {
            tmax0: -1,
            fmin0: i64::MAX,
            booster: XgbParams {
                n_stages: 20,
                max_depth: 3,
                learning_rate: 0.3,
                ..XgbParams::default()
            },
            max_iterations: None,
        }
    }
}

/// One iteration's outcome. `subset` holds the drawn majority row indices
/// (into the training dataset) for accepted iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XgbclusIteration {
    pub index: usize,
    pub tp: usize,
    pub fp: usize,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
}

/// Full audit trail of a run: accepted iterations carry strictly
/// increasing `tp` and strictly decreasing `fp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XgbclusTrace {
    pub iterations: Vec<XgbclusIteration>,
    pub tmax_final: usize,
    pub fmin_final: usize,
    /// Majority rows (training-set indices) of the winning subset.
    pub selected_indices: Vec<usize>,
}

/// Counts `(tp, fp)` of a booster fitted on `candidate` and scored on the
/// evaluation split.
fn score_candidate(
    candidate: &Dataset,
    eval: &Dataset,
    booster: &XgbParams,
    min_label: u8,
) -> Result<(usize, usize)> {
    let model = fit_xgb(candidate, booster)?;
    let mut tp = 0;
    let mut fp = 0;
    for i in 0..eval.n_rows() {
        let predicted_minority = if min_label == 1 {
            hard_label(model.predict_proba(eval.row(i))?) == 1
        } else {
            hard_label(model.predict_proba(eval.row(i))?) == 0
        };
        if predicted_minority {
            if eval.label(i) == min_label {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok((tp, fp))
}

/// Runs the selector. Returns the balanced sample (all minority rows plus
/// the winning majority subset, in row order) and the iteration trace.
///
/// `selector_eval` must be disjoint from `train`; its rows are only ever
/// scored, never returned.
pub fn xgbclus(
    train: &Dataset,
    selector_eval: &Dataset,
    cfg: &XgbclusConfig,
    seed: u64,
) -> Result<(Dataset, XgbclusTrace)> {
    let min_label = minority_label(train);
    let min_idx = train.class_indices(min_label);
    let maj_idx = train.class_indices(1 - min_label);
    if min_idx.is_empty() {
        return Err(Error::MissingClass { class: "minority" });
    }
    if maj_idx.is_empty() {
        return Err(Error::MissingClass { class: "majority" });
    }
    let (eneg, epos) = selector_eval.class_counts();
    if eneg == 0 || epos == 0 {
        return Err(Error::SingleClass);
    }

    let p = min_idx.len();
    // One iteration per disjoint majority chunk unless overridden; the
    // minority is the smaller class by construction, so each iteration
    // can draw its P majority rows without replacement.
    let k = cfg.max_iterations.unwrap_or(maj_idx.len() / p);

    let mut rng = seeded_rng(seed);
    let mut tmax = cfg.tmax0;
    let mut fmin = cfg.fmin0;
    let mut selected: Option<Vec<usize>> = None;
    let mut iterations = Vec::with_capacity(k);

    for index in 0..k {
        let mut drawn: Vec<usize> = sample(&mut rng, maj_idx.len(), p)
            .into_iter()
            .map(|pos| maj_idx[pos])
            .collect();
        drawn.sort_unstable();

        let mut rows = min_idx.clone();
        rows.extend_from_slice(&drawn);
        rows.sort_unstable();
        let candidate = train.subset(&rows);
        let (tp, fp) = score_candidate(&candidate, selector_eval, &cfg.booster, min_label)?;

        let accepted = (tp as i64) > tmax && (fp as i64) < fmin;
        if accepted {
            tmax = tp as i64;
            fmin = fp as i64;
            selected = Some(drawn.clone());
        }
        iterations.push(XgbclusIteration {
            index,
            tp,
            fp,
            accepted,
            subset: accepted.then_some(drawn),
        });
    }

    let selected = selected.ok_or(Error::EmptySelection { iterations: k })?;
    let mut rows = min_idx;
    rows.extend_from_slice(&selected);
    rows.sort_unstable();
    let trace = XgbclusTrace {
        iterations,
        tmax_final: tmax as usize,
        fmin_final: fmin as usize,
        selected_indices: selected,
    };
    Ok((train.subset(&rows), trace))
}

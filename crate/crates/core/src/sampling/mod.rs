//! Class-balance strategies: random under-sampling, NearMiss-1, the
//! XGBCLUS iterative selector, SMOTE, ADASYN, ENN and Tomek-link cleaning,
//! and the combined SMOTE pipelines. Every sampler is a pure function of
//! `(input, parameters, seed)`.

mod clean;
mod over;
mod under;
mod xgbclus;

pub use clean::{enn_clean, smote_enn, smote_tomek, tomek_remove};
pub use over::{adasyn, lerp_row, smote, AdasynOutput, SmoteOutput, SyntheticRecord};
pub use under::{near_miss_1, random_undersample};
pub use xgbclus::{xgbclus, XgbclusConfig, XgbclusIteration, XgbclusTrace};

use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_split, Dataset};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Under,
    Over,
}

/// Audit record emitted alongside every sampler run.
///
/// For under-sampling the ratio is `n_minority / n_majority_after`; for
/// over-sampling it is the inverse. Balanced outputs give 1 either way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    pub sampler: String,
    pub mode: SamplingMode,
    pub ratio: f64,
    pub n_minority: usize,
    pub n_majority_after: usize,
    /// Set when ADASYN found no majority-adjacent minority rows and fell
    /// back to a uniform allocation.
    pub uniform_fallback: bool,
}

impl BalanceReport {
    pub fn from_output(
        sampler: &str,
        mode: SamplingMode,
        d: &Dataset,
        uniform_fallback: bool,
    ) -> Self {
        let (min_count, maj_count) = minority_majority_counts(d);
        let ratio = match mode {
            SamplingMode::Under => min_count as f64 / maj_count as f64,
            SamplingMode::Over => maj_count as f64 / min_count as f64,
        };
        BalanceReport {
            sampler: sampler.to_string(),
            mode,
            ratio,
            n_minority: min_count,
            n_majority_after: maj_count,
            uniform_fallback,
        }
    }
}

/// `(minority count, majority count)`; ties treat the anomalous class as
/// the minority.
pub(crate) fn minority_majority_counts(d: &Dataset) -> (usize, usize) {
    let (neg, pos) = d.class_counts();
    if pos <= neg {
        (pos, neg)
    } else {
        (neg, pos)
    }
}

/// The minority label under the same convention.
pub(crate) fn minority_label(d: &Dataset) -> u8 {
    let (neg, pos) = d.class_counts();
    if pos <= neg {
        1
    } else {
        0
    }
}

pub(crate) fn require_both_classes(d: &Dataset) -> Result<()> {
    let (neg, pos) = d.class_counts();
    if pos == 0 {
        return Err(Error::MissingClass { class: "positive" });
    }
    if neg == 0 {
        return Err(Error::MissingClass { class: "negative" });
    }
    Ok(())
}

/// The closed set of sampler names accepted by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    None,
    Rus,
    Nearmiss1,
    Xgbclus,
    Smote,
    Adasyn,
    Smoteenn,
    Smotetomek,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 8] = [
        SamplerKind::None,
        SamplerKind::Rus,
        SamplerKind::Nearmiss1,
        SamplerKind::Xgbclus,
        SamplerKind::Smote,
        SamplerKind::Adasyn,
        SamplerKind::Smoteenn,
        SamplerKind::Smotetomek,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Rus => "rus",
            SamplerKind::Nearmiss1 => "nearmiss1",
            SamplerKind::Xgbclus => "xgbclus",
            SamplerKind::Smote => "smote",
            SamplerKind::Adasyn => "adasyn",
            SamplerKind::Smoteenn => "smoteenn",
            SamplerKind::Smotetomek => "smotetomek",
        }
    }

    pub fn parse(name: &str) -> Option<SamplerKind> {
        SamplerKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Shared tuning knobs for the dispatcher.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerParams {
    pub smote_k: usize,
    pub adasyn_k: usize,
    pub enn_k: usize,
    pub xgbclus: XgbclusConfig,
    /// Fraction of the training set carved off as the XGBCLUS selector
    /// evaluation split when no explicit one is supplied.
    pub selector_fraction: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            smote_k: 5,
            adasyn_k: 5,
            enn_k: 3,
            xgbclus: XgbclusConfig::default(),
            selector_fraction: 0.2,
        }
    }
}

/// One sampler's output: the resampled dataset, its balance report, and
/// the XGBCLUS trace when that sampler ran.
#[derive(Debug, Clone)]
pub struct SamplerRun {
    pub dataset: Dataset,
    pub report: BalanceReport,
    pub trace: Option<XgbclusTrace>,
}

/// Runs one named sampler on a training set.
///
/// `selector_eval` is only consulted by XGBCLUS: when absent, a stratified
/// `selector_fraction` of `train` is carved off as the evaluation split and
/// the remainder is resampled, so the data being scored never enters the
/// returned sample.
pub fn run_sampler(
    kind: SamplerKind,
    train: &Dataset,
    selector_eval: Option<&Dataset>,
    params: &SamplerParams,
    seed: u64,
) -> Result<SamplerRun> {
    let name = kind.name();
    let run =
        |dataset: Dataset, mode: SamplingMode, fallback: bool, trace: Option<XgbclusTrace>| {
            let report = BalanceReport::from_output(name, mode, &dataset, fallback);
            SamplerRun {
                dataset,
                report,
                trace,
            }
        };
    match kind {
        SamplerKind::None => Ok(run(train.clone(), SamplingMode::Under, false, None)),
        SamplerKind::Rus => {
            let out = random_undersample(train, seed)?;
            Ok(run(out, SamplingMode::Under, false, None))
        }
        SamplerKind::Nearmiss1 => {
            let out = near_miss_1(train)?;
            Ok(run(out, SamplingMode::Under, false, None))
        }
        SamplerKind::Xgbclus => {
            let (out, trace) = match selector_eval {
                Some(eval) => xgbclus(train, eval, &params.xgbclus, seed)?,
                None => {
                    let split = stratified_split(
                        train,
                        params.selector_fraction,
                        derive_seed(seed, "xgbclus/selector"),
                    )?;
                    xgbclus(&split.train, &split.test, &params.xgbclus, seed)?
                }
            };
            Ok(run(out, SamplingMode::Under, false, Some(trace)))
        }
        SamplerKind::Smote => {
            let out = smote(train, params.smote_k, seed)?;
            Ok(run(out.dataset, SamplingMode::Over, false, None))
        }
        SamplerKind::Adasyn => {
            let out = adasyn(train, params.adasyn_k, seed)?;
            Ok(run(
                out.dataset,
                SamplingMode::Over,
                out.uniform_fallback,
                None,
            ))
        }
        SamplerKind::Smoteenn => {
            let out = smote_enn(train, params.smote_k, params.enn_k, seed)?;
            Ok(run(out, SamplingMode::Over, false, None))
        }
        SamplerKind::Smotetomek => {
            let out = smote_tomek(train, params.smote_k, seed)?;
            Ok(run(out, SamplingMode::Over, false, None))
        }
    }
}

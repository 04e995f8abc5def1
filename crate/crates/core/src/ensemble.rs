//! The two ensemble architectures: stacked generalization with
//! out-of-fold meta-features feeding a logistic meta-classifier, and
//! hard/soft voting over tree-based members.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::FittedModel;
use crate::learners::{
    fit_logistic, hard_label, AdaBoostParams, ForestParams, GboostParams, LearnerConfig,
    LogisticModel, LogisticParams, TreeParams, XgbParams, DECISION_THRESHOLD,
};
use crate::rng::{child_rng, derive_seed};

use rand::seq::SliceRandom;

/// Base models used for stacking by default: RF, DT, GB, AdB.
pub fn stacked_default_bases() -> Vec<LearnerConfig> {
    vec![
        LearnerConfig::Rf(ForestParams::default()),
        LearnerConfig::Dt(TreeParams::default()),
        LearnerConfig::Gboost(GboostParams::default()),
        LearnerConfig::Adaboost(AdaBoostParams::default()),
    ]
}

/// Voting members used by default: DT, XGB, GB, RF, AdB.
pub fn voting_default_members() -> Vec<LearnerConfig> {
    vec![
        LearnerConfig::Dt(TreeParams::default()),
        LearnerConfig::Xgb(XgbParams::default()),
        LearnerConfig::Gboost(GboostParams::default()),
        LearnerConfig::Rf(ForestParams::default()),
        LearnerConfig::Adaboost(AdaBoostParams::default()),
    ]
}

/// Stacked ensemble. `fold_assignments` and `meta_features` are the audit
/// trail of the out-of-fold construction: row `i` was scored by clones of
/// the bases trained on every fold except `fold_assignments[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub base_models: Vec<FittedModel>,
    pub base_configs: Vec<LearnerConfig>,
    pub meta: LogisticModel,
    pub fold_count: usize,
    pub fold_assignments: Vec<usize>,
    /// Row-major `n_rows x n_bases` out-of-fold probability matrix.
    pub meta_features: Vec<f64>,
    pub seed: u64,
}

/// Stratified fold labels: indices shuffled within each class, dealt
/// round-robin, so every fold holds at least one row of each class.
pub fn stratified_folds(d: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "fold count must be >= 2, got {folds}"
        )));
    }
    let mut assignment = vec![0usize; d.n_rows()];
    for label in [0u8, 1u8] {
        let mut idx = d.class_indices(label);
        if idx.len() < folds {
            return Err(Error::UnsatisfiableStratification {
                label,
                count: idx.len(),
            });
        }
        let mut rng = child_rng(seed, if label == 1 { "folds/pos" } else { "folds/neg" });
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Recomputes the out-of-fold meta-feature matrix from the recorded fold
/// assignments. `fit_stacked` builds its matrix through this same path, so
/// a later audit call reproduces it bit for bit.
pub fn oof_meta_features(
    train: &Dataset,
    base_configs: &[LearnerConfig],
    fold_assignments: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = train.n_rows();
    let b = base_configs.len();
    let mut matrix = vec![0.0; n * b];
    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|&i| fold_assignments[i] != fold).collect();
        let score_rows: Vec<usize> = (0..n).filter(|&i| fold_assignments[i] == fold).collect();
        if train_rows.is_empty() || score_rows.is_empty() {
            continue;
        }
        let fold_train = train.subset(&train_rows);
        for (j, cfg) in base_configs.iter().enumerate() {
            let model = cfg.fit(
                &fold_train,
                derive_seed(seed, &format!("fold/{fold}/base/{j}")),
            )?;
            for &i in &score_rows {
                matrix[i * b + j] = model.predict_proba(train.row(i))?;
            }
        }
    }
    Ok(matrix)
}

/// Fits the stacked ensemble: out-of-fold meta-features, logistic meta
/// model on them, then base models refit on the full training set for
/// inference.
pub fn fit_stacked(
    train: &Dataset,
    base_configs: &[LearnerConfig],
    folds: usize,
    seed: u64,
) -> Result<StackedModel> {
    if base_configs.is_empty() {
        return Err(Error::InvalidParameter(
            "stacking needs at least one base model".to_string(),
        ));
    }
    let fold_assignments = stratified_folds(train, folds, derive_seed(seed, "stack/folds"))?;
    let meta_features = oof_meta_features(train, base_configs, &fold_assignments, folds, seed)?;

    let b = base_configs.len();
    let meta_columns: Vec<String> = (0..b).map(|j| format!("base_{j}")).collect();
    let meta_train = Dataset::new(
        meta_columns,
        train.label_name(),
        meta_features.clone(),
        train.labels().to_vec(),
    )?;
    let meta = fit_logistic(&meta_train, &LogisticParams::default())?;

    let mut base_models = Vec::with_capacity(b);
    for (j, cfg) in base_configs.iter().enumerate() {
        base_models.push(cfg.fit(train, derive_seed(seed, &format!("full/{j}")))?);
    }
    Ok(StackedModel {
        base_models,
        base_configs: base_configs.to_vec(),
        meta,
        fold_count: folds,
        fold_assignments,
        meta_features,
        seed,
    })
}

/// Meta probability over the full-train base probabilities.
pub fn predict_stacked(model: &StackedModel, x: &[f64]) -> Result<f64> {
    let mut features = Vec::with_capacity(model.base_models.len());
    for base in &model.base_models {
        features.push(base.predict_proba(x)?);
    }
    model.meta.predict_proba(&features)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingMode {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotingModel {
    pub members: Vec<FittedModel>,
    pub mode: VotingMode,
}

impl VotingModel {
    pub fn new(members: Vec<FittedModel>, mode: VotingMode) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidParameter(
                "voting needs at least two members".to_string(),
            ));
        }
        Ok(VotingModel { members, mode })
    }
}

/// Fits every member on the full training set.
pub fn fit_voting(
    train: &Dataset,
    member_configs: &[LearnerConfig],
    mode: VotingMode,
    seed: u64,
) -> Result<VotingModel> {
    let mut members = Vec::with_capacity(member_configs.len());
    for (j, cfg) in member_configs.iter().enumerate() {
        members.push(cfg.fit(train, derive_seed(seed, &format!("member/{j}")))?);
    }
    VotingModel::new(members, mode)
}

/// Votes the members. Hard mode takes the majority of member hard labels,
/// breaking exact ties by the mean probability and then toward label 0;
/// soft mode thresholds the mean probability. The returned probability is
/// the mean of the member probabilities in both modes.
pub fn predict_voting(model: &VotingModel, x: &[f64]) -> Result<(u8, f64)> {
    let mut probs = Vec::with_capacity(model.members.len());
    for m in &model.members {
        probs.push(m.predict_proba(x)?);
    }
    // Summed in sorted order so the mean is member-permutation invariant.
    let mut ordered = probs.clone();
    ordered.sort_by(|a, b| a.total_cmp(b));
    let mean = ordered.iter().sum::<f64>() / ordered.len() as f64;
    let label = match model.mode {
        VotingMode::Soft => hard_label(mean),
        VotingMode::Hard => {
            let votes = probs.iter().filter(|&&p| p > DECISION_THRESHOLD).count();
            let against = probs.len() - votes;
            if votes > against {
                1
            } else if votes < against {
                0
            } else {
                hard_label(mean)
            }
        }
    };
    Ok((label, mean))
}

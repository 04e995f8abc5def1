//! Experiment configuration: a JSON file describing the pipeline of
//! Figure-style runs (input -> preprocess -> split -> sample -> train ->
//! evaluate -> explain -> rules). Unknown keys are hard errors.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use txanomaly_core::ensemble::{stacked_default_bases, voting_default_members, VotingMode};
use txanomaly_core::learners::{
    AdaBoostParams, ForestParams, GboostParams, LearnerConfig, LogisticParams, TreeParams,
    XgbParams,
};
use txanomaly_core::sampling::{SamplerKind, SamplerParams};

use crate::errors::{CliError, CliResult};

pub const ALL_METRICS: [&str; 5] = ["accuracy", "tpr", "tnr", "fpr", "auc"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub input: InputSpec,
    #[serde(default)]
    pub preprocess: Option<PreprocessSpec>,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    /// When set, XGBCLUS scores candidate subsets on the final test set
    /// instead of a held-back selector split.
    #[serde(default)]
    pub select_on_test: bool,
    pub samplers: Vec<String>,
    #[serde(default)]
    pub sampler_params: Option<SamplerParams>,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub metrics: Option<Vec<String>>,
    #[serde(default)]
    pub shap: Option<ShapSpec>,
    #[serde(default)]
    pub rules: Option<RulesSpec>,
}

fn default_test_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub kind: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub n_major: Option<usize>,
    #[serde(default)]
    pub n_minor: Option<usize>,
    #[serde(default)]
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSpec {
    pub select_features: bool,
    pub p_threshold: f64,
    pub dedup_majority: bool,
    pub keep_negatives: Option<usize>,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        PreprocessSpec {
            select_features: true,
            p_threshold: 0.01,
            dedup_majority: true,
            keep_negatives: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    /// Stacked only.
    #[serde(default)]
    pub folds: Option<usize>,
    /// Voting only: "hard" or "soft".
    #[serde(default)]
    pub mode: Option<String>,
    /// Stacked bases / voting members; defaults follow the reference
    /// architectures when omitted.
    #[serde(default)]
    pub bases: Option<Vec<ModelSpec>>,
}

impl ModelSpec {
    pub fn bare(kind: &str) -> Self {
        ModelSpec {
            kind: kind.to_string(),
            params: None,
            folds: None,
            mode: None,
            bases: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapSpec {
    pub sampler: String,
    pub model: String,
    #[serde(default = "default_background")]
    pub background_size: usize,
    #[serde(default = "default_coalitions")]
    pub n_coalitions: usize,
    #[serde(default)]
    pub instances: Option<InstanceSpec>,
}

fn default_background() -> usize {
    100
}

fn default_coalitions() -> usize {
    2048
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: String,
    #[serde(default)]
    pub indices: Option<Vec<usize>>,
    #[serde(default)]
    pub label: Option<u8>,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesSpec {
    pub sampler: String,
    pub model: String,
    #[serde(default = "default_target")]
    pub target: String,
    #[serde(default = "default_min_support")]
    pub min_support: usize,
    #[serde(default = "default_min_confidence")]
    pub min_confidence: f64,
    /// "train" (the sampled training set) or "test".
    #[serde(default = "default_reference")]
    pub reference: String,
}

fn default_target() -> String {
    "anomalous".to_string()
}

fn default_min_support() -> usize {
    5
}

fn default_min_confidence() -> f64 {
    0.9
}

fn default_reference() -> String {
    "train".to_string()
}

/// A model spec resolved to something fittable, with a unique report id.
#[derive(Debug, Clone)]
pub enum ResolvedModel {
    Single(LearnerConfig),
    Stacked {
        bases: Vec<LearnerConfig>,
        folds: usize,
    },
    Voting {
        members: Vec<LearnerConfig>,
        mode: VotingMode,
    },
}

fn parse_params<T: serde::de::DeserializeOwned + Default>(
    kind: &str,
    params: &Option<serde_json::Value>,
) -> CliResult<T> {
    match params {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| CliError::usage(format!("bad params for '{kind}': {e}"))),
    }
}

fn reject_ensemble_fields(spec: &ModelSpec) -> CliResult<()> {
    if spec.folds.is_some() || spec.mode.is_some() || spec.bases.is_some() {
        return Err(CliError::usage(format!(
            "'{}' does not accept folds/mode/bases",
            spec.kind
        )));
    }
    Ok(())
}

pub fn resolve_single(spec: &ModelSpec) -> CliResult<LearnerConfig> {
    let cfg = match spec.kind.as_str() {
        "dt" => LearnerConfig::Dt(parse_params::<TreeParams>("dt", &spec.params)?),
        "rf" => LearnerConfig::Rf(parse_params::<ForestParams>("rf", &spec.params)?),
        "gboost" => LearnerConfig::Gboost(parse_params::<GboostParams>("gboost", &spec.params)?),
        "xgb" => LearnerConfig::Xgb(parse_params::<XgbParams>("xgb", &spec.params)?),
        "adaboost" => {
            LearnerConfig::Adaboost(parse_params::<AdaBoostParams>("adaboost", &spec.params)?)
        }
        "logistic" => {
            LearnerConfig::Logistic(parse_params::<LogisticParams>("logistic", &spec.params)?)
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown base learner kind '{other}'"
            )))
        }
    };
    reject_ensemble_fields(spec)?;
    Ok(cfg)
}

pub fn resolve_model(spec: &ModelSpec) -> CliResult<ResolvedModel> {
    match spec.kind.as_str() {
        "stacked" => {
            if spec.params.is_some() || spec.mode.is_some() {
                return Err(CliError::usage(
                    "'stacked' accepts only folds and bases".to_string(),
                ));
            }
            let bases = match &spec.bases {
                None => stacked_default_bases(),
                Some(list) => list
                    .iter()
                    .map(resolve_single)
                    .collect::<CliResult<Vec<_>>>()?,
            };
            Ok(ResolvedModel::Stacked {
                bases,
                folds: spec.folds.unwrap_or(10),
            })
        }
        "voting" | "voting_hard" | "voting_soft" => {
            if spec.params.is_some() || spec.folds.is_some() {
                return Err(CliError::usage(
                    "'voting' accepts only mode and bases".to_string(),
                ));
            }
            let mode = match (spec.kind.as_str(), spec.mode.as_deref()) {
                ("voting_hard", None) => VotingMode::Hard,
                ("voting_soft", None) => VotingMode::Soft,
                ("voting", Some("hard")) => VotingMode::Hard,
                ("voting", Some("soft")) => VotingMode::Soft,
                ("voting", None) => {
                    return Err(CliError::usage(
                        "'voting' needs mode: \"hard\" or \"soft\"".to_string(),
                    ))
                }
                (_, Some(other)) => {
                    return Err(CliError::usage(format!("unknown voting mode '{other}'")))
                }
                _ => unreachable!(),
            };
            let members = match &spec.bases {
                None => voting_default_members(),
                Some(list) => list
                    .iter()
                    .map(resolve_single)
                    .collect::<CliResult<Vec<_>>>()?,
            };
            Ok(ResolvedModel::Voting { members, mode })
        }
        _ => Ok(ResolvedModel::Single(resolve_single(spec)?)),
    }
}

/// Stable report identifier for a model spec: the kind (with the voting
/// mode folded in), deduplicated with a positional suffix.
pub fn model_ids(specs: &[ModelSpec]) -> CliResult<Vec<String>> {
    let mut ids = Vec::with_capacity(specs.len());
    for spec in specs {
        let base = match (spec.kind.as_str(), spec.mode.as_deref()) {
            ("voting", Some(mode)) => format!("voting_{mode}"),
            (kind, _) => kind.to_string(),
        };
        let mut id = base.clone();
        let mut suffix = 2;
        while ids.contains(&id) {
            id = format!("{base}_{suffix}");
            suffix += 1;
        }
        ids.push(id);
    }
    Ok(ids)
}

pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub samplers: Vec<SamplerKind>,
    pub models: Vec<(String, ResolvedModel)>,
    pub metrics: Vec<String>,
}

pub fn validate(config: ExperimentConfig) -> CliResult<ValidatedConfig> {
    if config.models.is_empty() {
        return Err(CliError::usage(
            "config needs at least one model".to_string(),
        ));
    }
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(CliError::usage(format!(
            "test_fraction must be in (0, 1), got {}",
            config.test_fraction
        )));
    }
    match config.input.kind.as_str() {
        "csv" => {
            if config.input.path.is_none() {
                return Err(CliError::usage("csv input needs 'path'".to_string()));
            }
            match config.input.schema.as_deref() {
                None | Some("full") | Some("reduced") | Some("auto") => {}
                Some(other) => return Err(CliError::usage(format!("unknown schema '{other}'"))),
            }
        }
        "synthetic" => {
            if config.input.n_major.is_none() || config.input.n_minor.is_none() {
                return Err(CliError::usage(
                    "synthetic input needs n_major and n_minor".to_string(),
                ));
            }
        }
        other => return Err(CliError::usage(format!("unknown input kind '{other}'"))),
    }

    let mut samplers = Vec::with_capacity(config.samplers.len());
    for name in &config.samplers {
        let kind = SamplerKind::parse(name)
            .ok_or_else(|| CliError::usage(format!("unknown sampler '{name}'")))?;
        if samplers.contains(&kind) {
            return Err(CliError::usage(format!("sampler '{name}' listed twice")));
        }
        samplers.push(kind);
    }
    if samplers.is_empty() {
        return Err(CliError::usage(
            "config needs at least one sampler".to_string(),
        ));
    }

    let ids = model_ids(&config.models)?;
    let mut models = Vec::with_capacity(config.models.len());
    for (id, spec) in ids.iter().zip(&config.models) {
        models.push((id.clone(), resolve_model(spec)?));
    }

    let metrics = match &config.metrics {
        None => ALL_METRICS.iter().map(|m| m.to_string()).collect(),
        Some(list) => {
            for m in list {
                if !ALL_METRICS.contains(&m.as_str()) {
                    return Err(CliError::usage(format!("unknown metric '{m}'")));
                }
            }
            list.clone()
        }
    };

    let check_cell = |sampler: &str, model: &str, what: &str| -> CliResult<()> {
        if !config.samplers.iter().any(|s| s == sampler) {
            return Err(CliError::usage(format!(
                "{what} references sampler '{sampler}' which is not in the grid"
            )));
        }
        if !ids.iter().any(|id| id == model) {
            return Err(CliError::usage(format!(
                "{what} references model '{model}' which is not in the grid"
            )));
        }
        Ok(())
    };
    if let Some(shap) = &config.shap {
        check_cell(&shap.sampler, &shap.model, "shap")?;
        if let Some(inst) = &shap.instances {
            match inst.kind.as_str() {
                "indices" => {
                    if inst.indices.is_none() {
                        return Err(CliError::usage(
                            "instances kind 'indices' needs 'indices'".to_string(),
                        ));
                    }
                }
                "label" => {
                    if !matches!(inst.label, Some(0) | Some(1)) {
                        return Err(CliError::usage(
                            "instances kind 'label' needs label 0 or 1".to_string(),
                        ));
                    }
                }
                "all" => {}
                other => return Err(CliError::usage(format!("unknown instances kind '{other}'"))),
            }
        }
    }
    if let Some(rules) = &config.rules {
        check_cell(&rules.sampler, &rules.model, "rules")?;
        let model_spec = ids
            .iter()
            .position(|id| id == &rules.model)
            .map(|at| &config.models[at])
            .expect("checked above");
        if model_spec.kind != "dt" {
            return Err(CliError::usage(format!(
                "rules extraction needs a 'dt' model, '{}' is '{}'",
                rules.model, model_spec.kind
            )));
        }
        if !matches!(rules.target.as_str(), "anomalous" | "normal") {
            return Err(CliError::usage(format!(
                "unknown rules target '{}'",
                rules.target
            )));
        }
        if !matches!(rules.reference.as_str(), "train" | "test") {
            return Err(CliError::usage(format!(
                "unknown rules reference '{}'",
                rules.reference
            )));
        }
    }

    Ok(ValidatedConfig {
        config,
        samplers,
        models,
        metrics,
    })
}

pub fn load(path: &std::path::Path) -> CliResult<(ExperimentConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    Ok((config, bytes))
}

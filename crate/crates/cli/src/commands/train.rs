//! `train`: fit one model on a CSV and save it as a versioned JSON file.

use std::path::Path;

use txanomaly_core::ensemble::{fit_stacked, fit_voting};
use txanomaly_core::model_io::{save_model, AnyModel, ModelFile};
use txanomaly_core::rng::derive_seed;

use crate::config::{resolve_model, ModelSpec, ResolvedModel};
use crate::errors::{CliError, CliResult};

pub fn fit_resolved(
    resolved: &ResolvedModel,
    train: &txanomaly_core::Dataset,
    seed: u64,
) -> CliResult<AnyModel> {
    Ok(match resolved {
        ResolvedModel::Single(cfg) => cfg.fit(train, seed)?.into(),
        ResolvedModel::Stacked { bases, folds } => {
            AnyModel::Stacked(fit_stacked(train, bases, *folds, seed)?)
        }
        ResolvedModel::Voting { members, mode } => {
            AnyModel::Voting(fit_voting(train, members, *mode, seed)?)
        }
    })
}

pub fn run(
    input: &Path,
    schema: &str,
    model: &str,
    params_path: Option<&Path>,
    folds: Option<usize>,
    seed: u64,
    out: &Path,
) -> CliResult<()> {
    let params = match params_path {
        None => None,
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("cannot read params {}: {e}", p.display())))?;
            Some(serde_json::from_str(&text)?)
        }
    };
    let spec = ModelSpec {
        params,
        folds,
        ..ModelSpec::bare(model)
    };
    let resolved = resolve_model(&spec)?;
    let data = super::load_data(input, schema)?;
    let fitted = fit_resolved(&resolved, &data, derive_seed(seed, "train"))?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    save_model(&ModelFile::new(fitted, seed), out)?;
    println!(
        "trained {model} on {} rows -> {}",
        data.n_rows(),
        out.display()
    );
    Ok(())
}

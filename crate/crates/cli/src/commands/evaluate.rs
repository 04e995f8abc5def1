//! `evaluate`: score a saved model against a labeled CSV.

use std::path::Path;

use serde::Serialize;

use txanomaly_core::dataset::Dataset;
use txanomaly_core::error::Error;
use txanomaly_core::metrics::{confusion, rates, roc_auc, roc_csv, ConfusionMatrix};
use txanomaly_core::model_io::{load_model, AnyModel};

use crate::errors::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct Evaluation {
    pub accuracy: Option<f64>,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
    pub fpr: Option<f64>,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
}

pub fn check_schema(model: &AnyModel, data: &Dataset) -> CliResult<()> {
    if let Some(names) = model.feature_names() {
        if names != data.columns() {
            return Err(Error::FeatureNameMismatch {
                model: names.join(","),
                data: data.columns().join(","),
            }
            .into());
        }
    }
    Ok(())
}

pub fn evaluate_model(model: &AnyModel, data: &Dataset) -> CliResult<(Evaluation, String)> {
    check_schema(model, data)?;
    let probabilities = model.predict_proba_batch(data)?;
    let labels = model.predict_batch(data)?;
    let cm = confusion(data.labels(), &labels)?;
    let r = rates(&cm);
    let (curve, auc) = roc_auc(data.labels(), &probabilities)?;
    Ok((
        Evaluation {
            accuracy: r.accuracy,
            tpr: r.tpr,
            tnr: r.tnr,
            fpr: r.fpr,
            auc,
            confusion: cm,
        },
        roc_csv(&curve),
    ))
}

pub fn run(model_path: &Path, input: &Path, schema: &str, out_dir: &Path) -> CliResult<()> {
    let file = load_model(model_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", model_path.display())))?;
    let data = super::load_data(input, schema)?;
    let (evaluation, roc) = evaluate_model(&file.model, &data)?;

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("metrics.json"),
        serde_json::to_string_pretty(&evaluation)?,
    )?;
    std::fs::write(out_dir.join("roc.csv"), roc)?;
    println!(
        "{}: accuracy {:?}, tpr {:?}, fpr {:?}, auc {:.4}",
        file.model.kind_name(),
        evaluation.accuracy,
        evaluation.tpr,
        evaluation.fpr,
        evaluation.auc
    );
    Ok(())
}

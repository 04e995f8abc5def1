//! `explain`: KernelSHAP attributions for selected instances of a data
//! file, with per-instance force records and the global importance CSV.

use std::path::Path;

use serde::Serialize;

use txanomaly_core::dataset::Dataset;
use txanomaly_core::explain::{
    force_record, global_importance, importance_csv, kernel_shap, AttributionVector,
};
use txanomaly_core::model_io::{load_model, AnyModel};
use txanomaly_core::rng::derive_seed;

use crate::errors::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct InstanceAttribution {
    pub index: usize,
    pub label: u8,
    pub attribution: AttributionVector,
}

pub struct ExplainOutput {
    pub attributions_json: String,
    pub force_records: Vec<(usize, String)>,
    pub importance_csv: String,
}

pub fn explain_instances(
    model: &AnyModel,
    data: &Dataset,
    instances: &[usize],
    background: &Dataset,
    n_coalitions: usize,
    seed: u64,
) -> CliResult<ExplainOutput> {
    super::evaluate::check_schema(model, data)?;
    let model_fn = |x: &[f64]| {
        model
            .predict_proba(x)
            .expect("dimensions verified before explaining")
    };
    let mut rows = Vec::with_capacity(instances.len());
    let mut force_records = Vec::with_capacity(instances.len());
    let mut vectors = Vec::with_capacity(instances.len());
    for &i in instances {
        let attribution = kernel_shap(
            &model_fn,
            data.row(i),
            background,
            n_coalitions,
            derive_seed(seed, &format!("shap/{i}")),
        )?;
        let record = force_record(&attribution, data.columns(), data.row(i))?;
        force_records.push((i, serde_json::to_string_pretty(&record)?));
        vectors.push(attribution.clone());
        rows.push(InstanceAttribution {
            index: i,
            label: data.label(i),
            attribution,
        });
    }
    let importance = global_importance(&vectors, data.columns())?;
    Ok(ExplainOutput {
        attributions_json: serde_json::to_string_pretty(&rows)?,
        force_records,
        importance_csv: importance_csv(&importance),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    model_path: &Path,
    input: &Path,
    schema: &str,
    instances: &str,
    background_size: usize,
    n_coalitions: usize,
    seed: u64,
    out_dir: &Path,
) -> CliResult<()> {
    let file = load_model(model_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", model_path.display())))?;
    let data = super::load_data(input, schema)?;
    let picked = super::parse_instances(instances, &data)?;
    let background = txanomaly_core::explain::background_sample(
        &data,
        background_size,
        derive_seed(seed, "shap/background"),
    );
    let output = explain_instances(&file.model, &data, &picked, &background, n_coalitions, seed)?;

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("attributions.json"), &output.attributions_json)?;
    for (i, record) in &output.force_records {
        std::fs::write(out_dir.join(format!("force_{i}.json")), record)?;
    }
    std::fs::write(
        out_dir.join("global_importance.csv"),
        &output.importance_csv,
    )?;
    println!(
        "explained {} instances -> {}",
        picked.len(),
        out_dir.display()
    );
    Ok(())
}

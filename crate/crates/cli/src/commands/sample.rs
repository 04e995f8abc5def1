//! `sample`: run one resampler on a training CSV and emit the balanced
//! set plus its audit reports.

use std::path::Path;

use txanomaly_core::dataset::save_csv;
use txanomaly_core::sampling::{run_sampler, SamplerKind, SamplerParams};

use crate::errors::{CliError, CliResult};

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    schema: &str,
    sampler: &str,
    seed: u64,
    out_dir: &Path,
    smote_k: usize,
    adasyn_k: usize,
    enn_k: usize,
    selector_fraction: f64,
) -> CliResult<()> {
    let kind = SamplerKind::parse(sampler)
        .ok_or_else(|| CliError::usage(format!("unknown sampler '{sampler}'")))?;
    let data = super::load_data(input, schema)?;
    let params = SamplerParams {
        smote_k,
        adasyn_k,
        enn_k,
        selector_fraction,
        ..SamplerParams::default()
    };
    let run = run_sampler(kind, &data, None, &params, seed)?;

    std::fs::create_dir_all(out_dir)?;
    save_csv(&run.dataset, out_dir.join("sampled.csv"))?;
    std::fs::write(
        out_dir.join("balance_report.json"),
        serde_json::to_string_pretty(&run.report)?,
    )?;
    if let Some(trace) = &run.trace {
        std::fs::write(
            out_dir.join("xgbclus_trace.json"),
            serde_json::to_string_pretty(trace)?,
        )?;
    }
    let (neg, pos) = run.dataset.class_counts();
    println!(
        "{}: {} rows ({} negative, {} positive) -> {}",
        kind.name(),
        run.dataset.n_rows(),
        neg,
        pos,
        out_dir.join("sampled.csv").display()
    );
    Ok(())
}

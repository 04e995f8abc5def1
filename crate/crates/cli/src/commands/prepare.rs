//! `prepare`: feature screening (t-test plus target-range detection),
//! majority dedup, optional negative cap, and the plot-data CSVs.

use std::fmt::Write as _;
use std::path::Path;

use txanomaly_core::dataset::{
    dedup_majority, format_value, pearson_correlation, select_features, welch_t_test, Dataset,
    TTestResult,
};
use txanomaly_core::error::Error;

use crate::errors::{CliError, CliResult};
use crate::manifest::sha256_hex;

pub struct ScreenOutcome {
    pub tests: Vec<TTestResult>,
    pub dropped: Vec<String>,
    pub dataset: Dataset,
}

/// Applies the standard screening policy: features whose values live in
/// {0,1} echo the target's range and are dropped outright; the rest keep
/// their Welch t-test and are dropped when `p >= p_threshold` (or when the
/// test is degenerate).
pub fn screen_features(d: &Dataset, p_threshold: f64) -> CliResult<ScreenOutcome> {
    let mut tests = Vec::new();
    let mut dropped: Vec<String> = Vec::new();
    for j in 0..d.n_features() {
        let name = d.columns()[j].clone();
        let column = d.column(j);
        let binary_range = column.iter().all(|&v| v == 0.0 || v == 1.0);
        let (neg, pos) = d.column_by_class(j);
        match welch_t_test(&neg, &pos) {
            Ok(t) => {
                let keep = !binary_range && t.p_value < p_threshold;
                tests.push(TTestResult {
                    feature: name.clone(),
                    t_value: t.t_value,
                    p_value: t.p_value,
                    degrees_of_freedom: t.degrees_of_freedom,
                });
                if !keep {
                    dropped.push(name);
                }
            }
            Err(Error::DegenerateTTest) => dropped.push(name),
            Err(e) => return Err(e.into()),
        }
    }
    if dropped.len() == d.n_features() {
        return Err(CliError::usage(
            "feature screening dropped every column; lower --p-threshold".to_string(),
        ));
    }
    let drop_refs: Vec<&str> = dropped.iter().map(|s| s.as_str()).collect();
    let dataset = select_features(d, &drop_refs)?;
    Ok(ScreenOutcome {
        tests,
        dropped,
        dataset,
    })
}

pub fn ttest_csv(tests: &[TTestResult]) -> String {
    let mut out = String::from("feature,t_value,p_value,degrees_of_freedom\n");
    for t in tests {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t.feature,
            format_value(t.t_value),
            format_value(t.p_value),
            format_value(t.degrees_of_freedom)
        );
    }
    out
}

pub fn correlation_csv(d: &Dataset) -> CliResult<String> {
    let matrix = pearson_correlation(d)?;
    let mut out = String::from("feature");
    for name in d.columns() {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (name, row) in d.columns().iter().zip(&matrix) {
        let _ = write!(out, "{name}");
        for v in row {
            let _ = write!(out, ",{}", format_value(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Caps the negative class at `cap` rows (first occurrences win),
/// keeping every positive row.
pub fn cap_negatives(d: &Dataset, cap: usize) -> Dataset {
    let mut keep = Vec::with_capacity(d.n_rows());
    let mut negatives = 0usize;
    for i in 0..d.n_rows() {
        if d.label(i) == 1 {
            keep.push(i);
        } else if negatives < cap {
            keep.push(i);
            negatives += 1;
        }
    }
    d.subset(&keep)
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    schema: &str,
    out_dir: &Path,
    p_threshold: f64,
    keep_negatives: Option<usize>,
    no_dedup: bool,
) -> CliResult<()> {
    let raw = super::load_data(input, schema)?;
    let screened = screen_features(&raw, p_threshold)?;
    let deduped = if no_dedup {
        screened.dataset.clone()
    } else {
        dedup_majority(&screened.dataset)
    };
    let capped = match keep_negatives {
        Some(cap) => cap_negatives(&deduped, cap),
        None => deduped,
    };

    std::fs::create_dir_all(out_dir)?;
    let prepared = out_dir.join("prepared.csv");
    txanomaly_core::dataset::save_csv(&capped, &prepared)?;
    std::fs::write(out_dir.join("ttest.csv"), ttest_csv(&screened.tests))?;
    std::fs::write(out_dir.join("correlation.csv"), correlation_csv(&capped)?)?;

    let bytes = std::fs::read(&prepared)?;
    println!(
        "prepared {} rows x {} features -> {} (sha256 {})",
        capped.n_rows(),
        capped.n_features(),
        prepared.display(),
        sha256_hex(&bytes)
    );
    if !screened.dropped.is_empty() {
        println!("dropped features: {}", screened.dropped.join(", "));
    }
    Ok(())
}

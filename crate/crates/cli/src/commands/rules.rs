//! `rules`: extract anomaly rules from a saved decision-tree model.

use std::path::Path;

use txanomaly_core::model_io::{load_model, AnyModel};
use txanomaly_core::rules::{extract_rules, rules_text_table, RuleClass};

use crate::errors::{CliError, CliResult};

pub fn parse_target(target: &str) -> CliResult<RuleClass> {
    match target {
        "anomalous" => Ok(RuleClass::Anomalous),
        "normal" => Ok(RuleClass::Normal),
        other => Err(CliError::usage(format!(
            "unknown target '{other}' (expected 'anomalous' or 'normal')"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    model_path: &Path,
    input: &Path,
    schema: &str,
    target: &str,
    min_support: usize,
    min_confidence: f64,
    out_dir: &Path,
) -> CliResult<()> {
    let file = load_model(model_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", model_path.display())))?;
    let tree = match &file.model {
        AnyModel::Dt(tree) => tree,
        other => {
            return Err(CliError::usage(format!(
                "rule extraction needs a decision-tree model, found '{}'",
                other.kind_name()
            )))
        }
    };
    let reference = super::load_data(input, schema)?;
    let rules = extract_rules(
        tree,
        &reference,
        parse_target(target)?,
        min_support,
        min_confidence,
    )?;

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(
        out_dir.join("rules.json"),
        serde_json::to_string_pretty(&rules)?,
    )?;
    std::fs::write(out_dir.join("rules.txt"), rules_text_table(&rules))?;
    if rules.is_empty() {
        println!("no qualifying rules (thresholds: support >= {min_support}, confidence >= {min_confidence})");
    } else {
        println!("extracted {} rules -> {}", rules.len(), out_dir.display());
    }
    Ok(())
}

//! `experiment`: the full grid runner. One config + one seed determine
//! every numeric output; stages are timed and the manifest records every
//! artifact with its digest. On a stage failure the partial results and
//! the manifest (marked incomplete) are preserved and the process exits
//! with code 3.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use txanomaly_core::dataset::{dedup_majority, gen_synthetic, stratified_split, Dataset};
use txanomaly_core::metrics::{confusion, rates, roc_auc};
use txanomaly_core::metrics::{grid_csv, metrics_csv, roc_csv, MetricsRow};
use txanomaly_core::model_io::AnyModel;
use txanomaly_core::rng::derive_seed;
use txanomaly_core::rules::{extract_rules, rules_text_table};
use txanomaly_core::sampling::{run_sampler, SamplerKind};

use crate::config::{self, InstanceSpec, ValidatedConfig};
use crate::errors::{CliError, CliResult};
use crate::manifest::{sha256_hex, Reporter};

use super::prepare::{cap_negatives, screen_features, ttest_csv};
use super::train::fit_resolved;

pub fn run(config_path: &Path, out_dir_override: Option<PathBuf>) -> CliResult<()> {
    let (raw_config, bytes) = config::load(config_path)?;
    let validated = config::validate(raw_config)?;
    let out_dir = out_dir_override
        .or_else(|| validated.config.output_dir.clone())
        .ok_or_else(|| {
            CliError::usage(
                "no output directory: set output_dir in the config or pass --out-dir".to_string(),
            )
        })?;
    let mut reporter = Reporter::new(&out_dir, sha256_hex(&bytes))?;
    match run_stages(&validated, &mut reporter) {
        Ok(()) => {
            reporter.finish(true)?;
            println!("experiment complete -> {}", out_dir.display());
            Ok(())
        }
        Err(e) => {
            // Keep partial results accounted for.
            let _ = reporter.finish(false);
            Err(e)
        }
    }
}

fn load_input(v: &ValidatedConfig, reporter: &mut Reporter) -> CliResult<Dataset> {
    let cfg = &v.config;
    let root = cfg.seed;
    match cfg.input.kind.as_str() {
        "synthetic" => Ok(gen_synthetic(
            cfg.input.n_major.unwrap(),
            cfg.input.n_minor.unwrap(),
            cfg.input.separation.unwrap_or(3.0),
            derive_seed(root, "input"),
        )),
        "csv" => {
            let path = cfg.input.path.as_ref().unwrap();
            let schema = cfg.input.schema.as_deref().unwrap_or("full");
            let raw = super::load_data(path, schema)?;
            let preprocess = cfg.preprocess.clone().unwrap_or_default();
            let selected = if preprocess.select_features {
                let screened = screen_features(&raw, preprocess.p_threshold)?;
                reporter.write("ttest.csv", ttest_csv(&screened.tests).as_bytes())?;
                screened.dataset
            } else {
                raw
            };
            let deduped = if preprocess.dedup_majority {
                dedup_majority(&selected)
            } else {
                selected
            };
            Ok(match preprocess.keep_negatives {
                Some(cap) => cap_negatives(&deduped, cap),
                None => deduped,
            })
        }
        _ => unreachable!("validated"),
    }
}

fn require_both_classes(d: &Dataset, what: &str) -> CliResult<()> {
    let (neg, pos) = d.class_counts();
    if neg == 0 || pos == 0 {
        return Err(CliError::usage(format!(
            "{what} needs both classes (has {neg} negative, {pos} positive)"
        )));
    }
    Ok(())
}

fn select_instances(spec: &Option<InstanceSpec>, test: &Dataset) -> CliResult<Vec<usize>> {
    let default_limit = 4usize;
    let picked = match spec {
        None => {
            let mut idx = test.class_indices(1);
            idx.truncate(default_limit);
            idx
        }
        Some(inst) => match inst.kind.as_str() {
            "indices" => inst.indices.clone().unwrap(),
            "label" => {
                let mut idx = test.class_indices(inst.label.unwrap());
                idx.truncate(inst.limit.unwrap_or(default_limit));
                idx
            }
            "all" => {
                let mut idx: Vec<usize> = (0..test.n_rows()).collect();
                if let Some(limit) = inst.limit {
                    idx.truncate(limit);
                }
                idx
            }
            _ => unreachable!("validated"),
        },
    };
    if picked.is_empty() {
        return Err(CliError::usage(
            "shap instance selection is empty".to_string(),
        ));
    }
    if let Some(&bad) = picked.iter().find(|&&i| i >= test.n_rows()) {
        return Err(CliError::usage(format!(
            "shap instance {bad} out of range (test set has {} rows)",
            test.n_rows()
        )));
    }
    Ok(picked)
}

fn run_stages(v: &ValidatedConfig, reporter: &mut Reporter) -> CliResult<()> {
    let cfg = &v.config;
    let root = cfg.seed;

    let data = reporter.stage("prepare", |rep| load_input(v, rep))?;
    require_both_classes(&data, "the experiment dataset")?;

    let split = reporter.stage("split", |_| {
        Ok(stratified_split(
            &data,
            cfg.test_fraction,
            derive_seed(root, "split"),
        )?)
    })?;
    require_both_classes(&split.test, "the test split")?;

    let sampler_params = cfg.sampler_params.clone().unwrap_or_default();
    let mut sampled: BTreeMap<&'static str, Dataset> = BTreeMap::new();
    for kind in &v.samplers {
        let name = kind.name();
        let run = reporter.stage(&format!("sample/{name}"), |rep| {
            let selector_eval = if cfg.select_on_test && *kind == SamplerKind::Xgbclus {
                Some(&split.test)
            } else {
                None
            };
            let run = run_sampler(
                *kind,
                &split.train,
                selector_eval,
                &sampler_params,
                derive_seed(root, &format!("sampler/{name}")),
            )?;
            rep.write(
                &format!("reports/balance_{name}.json"),
                serde_json::to_string_pretty(&run.report)?.as_bytes(),
            )?;
            if let Some(trace) = &run.trace {
                rep.write(
                    "xgbclus_trace.json",
                    serde_json::to_string_pretty(trace)?.as_bytes(),
                )?;
            }
            Ok(run)
        })?;
        sampled.insert(name, run.dataset);
    }

    let mut rows: Vec<MetricsRow> = Vec::new();
    let mut fitted: BTreeMap<(String, String), AnyModel> = BTreeMap::new();
    for kind in &v.samplers {
        let sampler_name = kind.name();
        let train = &sampled[sampler_name];
        for (model_id, resolved) in &v.models {
            let stage_name = format!("cell/{sampler_name}/{model_id}");
            let row = reporter.stage(&stage_name, |rep| {
                let seed = derive_seed(root, &format!("cell/{sampler_name}/{model_id}"));
                let model = fit_resolved(resolved, train, seed)?;
                let probabilities = model.predict_proba_batch(&split.test)?;
                let labels = model.predict_batch(&split.test)?;
                let cm = confusion(split.test.labels(), &labels)?;
                let r = rates(&cm);
                let (curve, auc) = roc_auc(split.test.labels(), &probabilities)?;
                rep.write(
                    &format!("roc/{sampler_name}_{model_id}.csv"),
                    roc_csv(&curve).as_bytes(),
                )?;
                fitted.insert((sampler_name.to_string(), model_id.clone()), model);
                Ok(MetricsRow {
                    sampler: sampler_name.to_string(),
                    model: model_id.clone(),
                    accuracy: r.accuracy,
                    tpr: r.tpr,
                    tnr: r.tnr,
                    fpr: r.fpr,
                    auc,
                    confusion: cm,
                })
            })?;
            rows.push(row);
        }
    }

    reporter.stage("report", |rep| {
        rep.write(
            "metrics.json",
            serde_json::to_string_pretty(&rows)?.as_bytes(),
        )?;
        rep.write("metrics.csv", metrics_csv(&rows).as_bytes())?;
        for metric in &v.metrics {
            rep.write(
                &format!("grid_{metric}.csv"),
                grid_csv(&rows, metric).map_err(CliError::from)?.as_bytes(),
            )?;
        }
        Ok(())
    })?;

    if let Some(shap) = &cfg.shap {
        reporter.stage("shap", |rep| {
            let model = &fitted[&(shap.sampler.clone(), shap.model.clone())];
            let train = &sampled[shap.sampler.as_str()];
            let background = txanomaly_core::explain::background_sample(
                train,
                shap.background_size,
                derive_seed(root, "shap/background"),
            );
            let picked = select_instances(&shap.instances, &split.test)?;
            let output = super::explain::explain_instances(
                model,
                &split.test,
                &picked,
                &background,
                shap.n_coalitions,
                root,
            )?;
            rep.write(
                "shap/attributions.json",
                output.attributions_json.as_bytes(),
            )?;
            for (i, record) in &output.force_records {
                rep.write(&format!("shap/force_{i}.json"), record.as_bytes())?;
            }
            rep.write(
                "shap/global_importance.csv",
                output.importance_csv.as_bytes(),
            )?;
            Ok(())
        })?;
    }

    if let Some(rules_cfg) = &cfg.rules {
        reporter.stage("rules", |rep| {
            let model = &fitted[&(rules_cfg.sampler.clone(), rules_cfg.model.clone())];
            let tree = match model {
                AnyModel::Dt(tree) => tree,
                other => {
                    return Err(CliError::usage(format!(
                        "rules cell resolved to '{}', expected a decision tree",
                        other.kind_name()
                    )))
                }
            };
            let reference = if rules_cfg.reference == "train" {
                &sampled[rules_cfg.sampler.as_str()]
            } else {
                &split.test
            };
            let rules = extract_rules(
                tree,
                reference,
                super::rules::parse_target(&rules_cfg.target)?,
                rules_cfg.min_support,
                rules_cfg.min_confidence,
            )?;
            rep.write(
                "rules/rules.json",
                serde_json::to_string_pretty(&rules)?.as_bytes(),
            )?;
            rep.write("rules/rules.txt", rules_text_table(&rules).as_bytes())?;
            Ok(())
        })?;
    }

    Ok(())
}

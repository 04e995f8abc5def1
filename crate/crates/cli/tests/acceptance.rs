//! Acceptance criterion 11: two `experiment` runs with the same config
//! and seed produce byte-identical metrics files.

use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_txanomaly")
}

#[test]
fn criterion_11_end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = r#"{
  "seed": 41,
  "input": {"kind": "synthetic", "n_major": 500, "n_minor": 40, "separation": 3.0},
  "samplers": ["none", "rus", "xgbclus", "smote"],
  "models": [
    {"kind": "dt"},
    {"kind": "gboost", "params": {"n_stages": 20}},
    {"kind": "stacked", "folds": 5, "bases": [{"kind": "dt"}, {"kind": "adaboost", "params": {"n_rounds": 8}}]},
    {"kind": "voting", "mode": "hard", "bases": [{"kind": "dt"}, {"kind": "gboost", "params": {"n_stages": 10}}, {"kind": "adaboost", "params": {"n_rounds": 8}}]}
  ],
  "shap": {"sampler": "xgbclus", "model": "gboost", "background_size": 30, "instances": {"kind": "label", "label": 1, "limit": 2}},
  "rules": {"sampler": "xgbclus", "model": "dt", "min_support": 2, "min_confidence": 0.7}
}"#;
    std::fs::write(root.join("config.json"), config).unwrap();

    for out in ["run_a", "run_b"] {
        let status = Command::new(bin())
            .args(["experiment", "--config", "config.json", "--out-dir", out])
            .current_dir(root)
            .status()
            .unwrap();
        assert!(status.success());
    }

    let compare = |rel: &str| {
        let a = std::fs::read(root.join("run_a").join(rel)).unwrap();
        let b = std::fs::read(root.join("run_b").join(rel)).unwrap();
        assert_eq!(a, b, "{rel} differs between identical runs");
    };
    compare("metrics.json");
    compare("metrics.csv");
    for metric in ["accuracy", "tpr", "tnr", "fpr", "auc"] {
        compare(&format!("grid_{metric}.csv"));
    }
    // Numeric side outputs are part of the determinism contract too.
    compare("xgbclus_trace.json");
    compare("shap/attributions.json");
    compare("shap/global_importance.csv");
    compare("rules/rules.json");
    compare("rules/rules.txt");
    for entry in std::fs::read_dir(root.join("run_a/roc")).unwrap() {
        let name = entry.unwrap().file_name();
        compare(&format!("roc/{}", name.to_string_lossy()));
    }
    check_rows(root);
    println!("acceptance criterion 11 (end-to-end determinism): PASS");
}

fn check_rows(root: &Path) {
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("run_a/metrics.json")).unwrap())
            .unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 16);
}

//! Human-readable anomaly rules lifted from decision-tree paths, with
//! support/confidence replayed against a reference dataset, plus the
//! normalized Gini feature importances of a fitted tree.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{gini, hard_label, Node, TreeModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleOp {
    /// value <= threshold
    Le,
    /// value > threshold
    Gt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature: String,
    pub op: RuleOp,
    pub threshold: f64,
}

impl Predicate {
    pub fn holds(&self, value: f64) -> bool {
        match self.op {
            RuleOp::Le => value <= self.threshold,
            RuleOp::Gt => value > self.threshold,
        }
    }

    fn text(&self) -> String {
        match self.op {
            RuleOp::Gt => format!("{} is greater than {:.3}", self.feature, self.threshold),
            RuleOp::Le => format!(
                "{} is less than or equal to {:.3}",
                self.feature, self.threshold
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleClass {
    Anomalous,
    Normal,
}

impl RuleClass {
    pub fn label(&self) -> u8 {
        match self {
            RuleClass::Anomalous => 1,
            RuleClass::Normal => 0,
        }
    }

    pub fn from_label(label: u8) -> Self {
        if label == 1 {
            RuleClass::Anomalous
        } else {
            RuleClass::Normal
        }
    }

    fn text(&self) -> &'static str {
        match self {
            RuleClass::Anomalous => "Anomalous",
            RuleClass::Normal => "Normal",
        }
    }
}

/// A conjunction of threshold predicates with counts replayed over a
/// reference dataset: `confidence = correct / support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRule {
    pub predicates: Vec<Predicate>,
    pub predicted_class: RuleClass,
    pub support: usize,
    pub correct: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub entries: Vec<(String, f64)>,
}

/// Raw root-to-leaf paths: the unsimplified predicate list and the leaf's
/// predicted class, in depth-first (left child first) order.
pub fn leaf_paths(tree: &TreeModel) -> Vec<(Vec<Predicate>, RuleClass)> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<Predicate>)> = vec![(0, Vec::new())];
    while let Some((at, path)) = stack.pop() {
        match &tree.nodes[at] {
            Node::Leaf {
                predicted_probability,
                ..
            } => {
                out.push((
                    path,
                    RuleClass::from_label(hard_label(*predicted_probability)),
                ));
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                let name = tree.feature_names[*feature].clone();
                let mut left_path = path.clone();
                left_path.push(Predicate {
                    feature: name.clone(),
                    op: RuleOp::Le,
                    threshold: *threshold,
                });
                let mut right_path = path;
                right_path.push(Predicate {
                    feature: name,
                    op: RuleOp::Gt,
                    threshold: *threshold,
                });
                // Right is pushed first so the left branch pops first.
                stack.push((*right, right_path));
                stack.push((*left, left_path));
            }
        }
    }
    out
}

/// Collapses a path to the tightest bound per feature: the largest `>`
/// threshold and the smallest `<=` threshold, ordered by each feature's
/// first appearance with the lower bound first.
pub fn simplify_predicates(path: &[Predicate]) -> Vec<Predicate> {
    let mut features: Vec<&str> = Vec::new();
    for p in path {
        if !features.contains(&p.feature.as_str()) {
            features.push(&p.feature);
        }
    }
    let mut out = Vec::new();
    for name in features {
        let mut lower: Option<f64> = None;
        let mut upper: Option<f64> = None;
        for p in path.iter().filter(|p| p.feature == name) {
            match p.op {
                RuleOp::Gt => lower = Some(lower.map_or(p.threshold, |t: f64| t.max(p.threshold))),
                RuleOp::Le => upper = Some(upper.map_or(p.threshold, |t: f64| t.min(p.threshold))),
            }
        }
        if let Some(t) = lower {
            out.push(Predicate {
                feature: name.to_string(),
                op: RuleOp::Gt,
                threshold: t,
            });
        }
        if let Some(t) = upper {
            out.push(Predicate {
                feature: name.to_string(),
                op: RuleOp::Le,
                threshold: t,
            });
        }
    }
    out
}

/// True iff every predicate holds for the row (an empty rule matches
/// everything).
pub fn apply_rule(rule: &AnomalyRule, columns: &[String], row: &[f64]) -> Result<bool> {
    predicates_match(&rule.predicates, columns, row)
}

pub fn predicates_match(predicates: &[Predicate], columns: &[String], row: &[f64]) -> Result<bool> {
    for p in predicates {
        let j = columns
            .iter()
            .position(|c| *c == p.feature)
            .ok_or_else(|| Error::MissingFeature {
                name: p.feature.clone(),
            })?;
        if !p.holds(row[j]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One candidate rule per leaf predicting `target`, simplified, replayed
/// over `reference` for support/correct/confidence, filtered by the
/// minimums, and sorted by confidence then support (both descending).
pub fn extract_rules(
    tree: &TreeModel,
    reference: &Dataset,
    target: RuleClass,
    min_support: usize,
    min_confidence: f64,
) -> Result<Vec<AnomalyRule>> {
    if tree.feature_names != reference.columns() {
        return Err(Error::FeatureNameMismatch {
            model: tree.feature_names.join(","),
            data: reference.columns().join(","),
        });
    }
    let mut rules = Vec::new();
    for (path, class) in leaf_paths(tree) {
        if class != target {
            continue;
        }
        let predicates = simplify_predicates(&path);
        let mut support = 0usize;
        let mut correct = 0usize;
        for i in 0..reference.n_rows() {
            if predicates_match(&predicates, reference.columns(), reference.row(i))? {
                support += 1;
                if reference.label(i) == target.label() {
                    correct += 1;
                }
            }
        }
        if support == 0 || support < min_support {
            continue;
        }
        let confidence = correct as f64 / support as f64;
        if confidence < min_confidence {
            continue;
        }
        rules.push(AnomalyRule {
            predicates,
            predicted_class: target,
            support,
            correct,
            confidence,
        });
    }
    rules.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(b.support.cmp(&a.support))
    });
    Ok(rules)
}

/// Per-feature share of the tree's total weighted Gini decrease. A
/// single-leaf tree yields an empty table.
pub fn gini_importances(tree: &TreeModel) -> Result<ImportanceTable> {
    let root_samples = match &tree.nodes[0] {
        Node::Split { n_samples, .. } => *n_samples,
        Node::Leaf { .. } => return Ok(ImportanceTable { entries: vec![] }),
    };
    let total = root_samples as f64;
    let node_impurity = |at: usize| -> Result<(f64, usize)> {
        match &tree.nodes[at] {
            Node::Split {
                impurity,
                n_samples,
                ..
            } => Ok((*impurity, *n_samples)),
            Node::Leaf { class_counts, .. } => {
                Ok((gini(*class_counts)?, class_counts[0] + class_counts[1]))
            }
        }
    };
    let mut raw = vec![0.0; tree.feature_names.len()];
    for node in &tree.nodes {
        if let Node::Split {
            feature,
            left,
            right,
            n_samples,
            impurity,
            ..
        } = node
        {
            let (left_imp, left_n) = node_impurity(*left)?;
            let (right_imp, right_n) = node_impurity(*right)?;
            raw[*feature] += (*n_samples as f64 / total) * impurity
                - (left_n as f64 / total) * left_imp
                - (right_n as f64 / total) * right_imp;
        }
    }
    let sum: f64 = raw.iter().sum();
    let mut entries: Vec<(String, f64)> = tree
        .feature_names
        .iter()
        .zip(&raw)
        .map(|(name, v)| (name.clone(), v / sum))
        .collect();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].1.total_cmp(&entries[a].1).then(a.cmp(&b)));
    entries = order.into_iter().map(|i| entries[i].clone()).collect();
    Ok(ImportanceTable { entries })
}

/// Importances as CSV plot data.
pub fn importance_table_csv(table: &ImportanceTable) -> String {
    let mut out = String::from("feature,importance\n");
    for (name, v) in &table.entries {
        out.push_str(&format!("{},{}\n", name, crate::dataset::format_value(*v)));
    }
    out
}

/// Rule text in the reporting style: thresholds at three decimals,
/// confidence as a whole percent.
pub fn rule_text(rule: &AnomalyRule) -> String {
    let clauses: Vec<String> = rule.predicates.iter().map(|p| p.text()).collect();
    if clauses.is_empty() {
        format!("If (always) then {}", rule.predicted_class.text())
    } else {
        format!(
            "If ({}) then {}",
            clauses.join(" and "),
            rule.predicted_class.text()
        )
    }
}

/// The full text table: rule, class, total, correct, confidence%.
pub fn rules_text_table(rules: &[AnomalyRule]) -> String {
    if rules.is_empty() {
        return "no qualifying rules\n".to_string();
    }
    let mut out = String::from("rule | class | total | correct | confidence%\n");
    for (i, rule) in rules.iter().enumerate() {
        out.push_str(&format!(
            "{}. {} | {} | {} | {} | {:.0}\n",
            i + 1,
            rule_text(rule),
            rule.predicted_class.text(),
            rule.support,
            rule.correct,
            rule.confidence * 100.0,
        ));
    }
    out
}

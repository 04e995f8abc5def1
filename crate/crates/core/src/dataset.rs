//! Row-major labeled feature matrices and the preprocessing steps applied
//! to them: CSV ingestion, Welch t-test feature screening, majority-class
//! dedup, stratified splitting, and a seeded synthetic generator for
//! desk-scale experiments.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// The twelve raw columns of the transaction schema, label last.
pub const FULL_COLUMNS: [&str; 12] = [
    "indegree",
    "outdegree",
    "in_btc",
    "out_btc",
    "total_btc",
    "mean_in_btc",
    "mean_out_btc",
    "in_malicious",
    "out_malicious",
    "is_malicious",
    "all_malicious",
    "out_and_tx_malicious",
];

/// The six retained features plus the label.
pub const REDUCED_COLUMNS: [&str; 7] = [
    "indegree",
    "in_btc",
    "out_btc",
    "total_btc",
    "mean_in_btc",
    "mean_out_btc",
    "out_and_tx_malicious",
];

/// Feature columns dropped by the standard preprocessing policy.
pub const DROP_POLICY: [&str; 5] = [
    "outdegree",
    "in_malicious",
    "out_malicious",
    "is_malicious",
    "all_malicious",
];

pub const LABEL_COLUMN: &str = "out_and_tx_malicious";

/// Expected CSV layout: ordered column names with one of them acting as
/// the binary label.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<String>,
    pub label: String,
}

impl Schema {
    pub fn new(columns: Vec<String>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !columns.contains(&label) {
            return Err(Error::UnknownColumn { name: label });
        }
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.clone()) {
                return Err(Error::DuplicateColumn { name: c.clone() });
            }
        }
        Ok(Schema { columns, label })
    }

    /// The raw 12-column layout.
    pub fn full() -> Self {
        Schema {
            columns: FULL_COLUMNS.iter().map(|s| s.to_string()).collect(),
            label: LABEL_COLUMN.to_string(),
        }
    }

    /// The reduced 7-column layout (six features + label).
    pub fn reduced() -> Self {
        Schema {
            columns: REDUCED_COLUMNS.iter().map(|s| s.to_string()).collect(),
            label: LABEL_COLUMN.to_string(),
        }
    }
}

/// A labeled feature matrix. Rows are stored row-major; labels are 0
/// (non-anomalous) or 1 (anomalous). Instances are immutable once built
/// and cheap to share across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<String>,
    label_name: String,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    /// Validates and assembles a dataset from row-major values.
    pub fn new(
        columns: Vec<String>,
        label_name: impl Into<String>,
        values: Vec<f64>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let d = columns.len();
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.clone()) {
                return Err(Error::DuplicateColumn { name: c.clone() });
            }
        }
        if d == 0 || labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if values.len() != d * labels.len() {
            return Err(Error::LabelCount {
                rows: values.len() / d.max(1),
                labels: labels.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i / d,
                    column: columns[i % d].clone(),
                });
            }
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::NonBinaryLabel);
        }
        Ok(Dataset {
            columns,
            label_name: label_name.into(),
            values,
            labels,
        })
    }

    /// Builds a dataset from one `(row, label)` pair per record.
    pub fn from_rows(
        columns: Vec<String>,
        label_name: impl Into<String>,
        rows: &[(&[f64], u8)],
    ) -> Result<Self> {
        let d = columns.len();
        let mut values = Vec::with_capacity(rows.len() * d);
        let mut labels = Vec::with_capacity(rows.len());
        for (row, label) in rows {
            if row.len() != d {
                return Err(Error::RowWidth {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
            labels.push(*label);
        }
        Dataset::new(columns, label_name, values, labels)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Flat row-major feature values (`n_rows * n_features` entries).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// One copied column as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// `(negatives, positives)` counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// Row indices carrying the given label, in row order.
    pub fn class_indices(&self, label: u8) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// New dataset with the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            columns: self.columns.clone(),
            label_name: self.label_name.clone(),
            values,
            labels,
        }
    }

    /// Column values split by class: `(label-0 values, label-1 values)`.
    pub fn column_by_class(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        let mut neg = Vec::new();
        let mut pos = Vec::new();
        for i in 0..self.n_rows() {
            let v = self.row(i)[j];
            if self.labels[i] == 1 {
                pos.push(v);
            } else {
                neg.push(v);
            }
        }
        (neg, pos)
    }

    pub(crate) fn push_row(&mut self, row: &[f64], label: u8) {
        debug_assert_eq!(row.len(), self.n_features());
        self.values.extend_from_slice(row);
        self.labels.push(label);
    }
}

/// A disjoint train/test partition of one dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
}

/// Welch t statistic with its Satterthwaite degrees of freedom and
/// two-tailed p-value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WelchTTest {
    pub t_value: f64,
    pub p_value: f64,
    pub degrees_of_freedom: f64,
}

/// Per-feature t-test outcome, as reported by `feature_t_tests`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TTestResult {
    pub feature: String,
    pub t_value: f64,
    pub p_value: f64,
    pub degrees_of_freedom: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (n-1) sample variance.
fn sample_variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Two-sample Welch t-test with unequal variances.
///
/// `t = (mean(a) - mean(b)) / sqrt(var(a)/na + var(b)/nb)`, degrees of
/// freedom by Welch-Satterthwaite, and the two-tailed p-value from the
/// regularized incomplete beta form of the t CDF.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::TooFewSamples {
            a: a.len(),
            b: b.len(),
        });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a, ma), sample_variance(b, mb));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        if ma == mb {
            return Err(Error::DegenerateTTest);
        }
        // Constant groups with different means: the statistic diverges and
        // the tail mass is zero under any df; report the pooled df.
        return Ok(WelchTTest {
            t_value: if ma > mb {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            p_value: 0.0,
            degrees_of_freedom: na + nb - 2.0,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    let p = if t == 0.0 {
        1.0
    } else {
        // Two-tailed mass: P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
        statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t * t))
    };
    Ok(WelchTTest {
        t_value: t,
        p_value: p.clamp(0.0, 1.0),
        degrees_of_freedom: df,
    })
}

/// Runs the Welch t-test per feature, comparing non-anomalous against
/// anomalous rows (`t = mean(label 0) - mean(label 1)` direction).
pub fn feature_t_tests(d: &Dataset) -> Result<Vec<TTestResult>> {
    let mut out = Vec::with_capacity(d.n_features());
    for j in 0..d.n_features() {
        let (neg, pos) = d.column_by_class(j);
        let t = welch_t_test(&neg, &pos)?;
        out.push(TTestResult {
            feature: d.columns()[j].clone(),
            t_value: t.t_value,
            p_value: t.p_value,
            degrees_of_freedom: t.degrees_of_freedom,
        });
    }
    Ok(out)
}

/// Drops the named feature columns, keeping everything else in order.
pub fn select_features(d: &Dataset, drop: &[&str]) -> Result<Dataset> {
    for name in drop {
        if *name == d.label_name() {
            return Err(Error::DropLabel {
                name: name.to_string(),
            });
        }
        if d.column_index(name).is_none() {
            return Err(Error::UnknownColumn {
                name: name.to_string(),
            });
        }
    }
    let keep: Vec<usize> = (0..d.n_features())
        .filter(|&j| !drop.contains(&d.columns()[j].as_str()))
        .collect();
    let columns: Vec<String> = keep.iter().map(|&j| d.columns()[j].clone()).collect();
    let mut values = Vec::with_capacity(d.n_rows() * keep.len());
    for i in 0..d.n_rows() {
        let row = d.row(i);
        for &j in &keep {
            values.push(row[j]);
        }
    }
    Dataset::new(columns, d.label_name(), values, d.labels().to_vec())
}

/// Removes duplicate feature vectors among the negative rows, keeping the
/// first occurrence. Positive rows are always kept, duplicates included.
pub fn dedup_majority(d: &Dataset) -> Dataset {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut keep = Vec::with_capacity(d.n_rows());
    for i in 0..d.n_rows() {
        if d.label(i) == 1 {
            keep.push(i);
            continue;
        }
        let key: Vec<u64> = d.row(i).iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            keep.push(i);
        }
    }
    d.subset(&keep)
}

/// Splits into train/test with per-class proportions, shuffling each class
/// with its own derived stream so the partition is a pure function of
/// `(dataset, test_fraction, seed)`.
pub fn stratified_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut test_idx = Vec::new();
    let mut train_idx = Vec::new();
    for label in [0u8, 1u8] {
        let mut idx = d.class_indices(label);
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::UnsatisfiableStratification {
                label,
                count: idx.len(),
            });
        }
        let mut rng = rng::child_rng(seed, if label == 1 { "split/pos" } else { "split/neg" });
        idx.shuffle(&mut rng);
        let want = (test_fraction * idx.len() as f64).round() as usize;
        let take = want.clamp(1, idx.len() - 1);
        test_idx.extend_from_slice(&idx[..take]);
        train_idx.extend_from_slice(&idx[take..]);
    }
    // Keep original row order inside each part.
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok(SplitPair {
        train: d.subset(&train_idx),
        test: d.subset(&test_idx),
    })
}

// Per-feature negative-class means and standard deviations for the
// synthetic generator, loosely shaped like real transaction magnitudes.
const SYNTH_MEANS: [f64; 6] = [2.0, 16.0, 16.0, 32.0, 8.0, 5.0];
const SYNTH_SDS: [f64; 6] = [1.0, 4.0, 4.0, 8.0, 2.0, 1.5];
// total_btc, mean_in_btc, mean_out_btc carry the class signal.
const SYNTH_SHIFTED: [usize; 3] = [3, 4, 5];
// Anomalies cluster tighter than the background traffic.
const SYNTH_POS_SPREAD: f64 = 0.6;

/// Generates a labeled two-cluster dataset with the reduced schema.
///
/// Negatives are one Gaussian cluster per feature. Positives share the
/// noise features and are shifted in the three signal features; `separation`
/// is the total shift in noise standard deviations, split evenly across the
/// three signal directions, so `separation = 0` makes the classes
/// indistinguishable and large values make them cleanly separable.
pub fn gen_synthetic(n_major: usize, n_minor: usize, separation: f64, seed: u64) -> Dataset {
    assert!(
        n_major >= 1 && n_minor >= 1,
        "need at least one row per class"
    );
    let columns: Vec<String> = REDUCED_COLUMNS[..6].iter().map(|s| s.to_string()).collect();
    let per_axis = separation / (SYNTH_SHIFTED.len() as f64).sqrt();
    let mut values = Vec::with_capacity((n_major + n_minor) * 6);
    let mut labels = Vec::with_capacity(n_major + n_minor);

    let mut rng_neg = rng::child_rng(seed, "synthetic/neg");
    for _ in 0..n_major {
        for j in 0..6 {
            let dist = Normal::new(SYNTH_MEANS[j], SYNTH_SDS[j]).unwrap();
            values.push(dist.sample(&mut rng_neg));
        }
        labels.push(0);
    }
    let mut rng_pos = rng::child_rng(seed, "synthetic/pos");
    for _ in 0..n_minor {
        for j in 0..6 {
            let shifted = SYNTH_SHIFTED.contains(&j);
            let mean = SYNTH_MEANS[j]
                + if shifted {
                    per_axis * SYNTH_SDS[j]
                } else {
                    0.0
                };
            let sd = SYNTH_SDS[j] * if shifted { SYNTH_POS_SPREAD } else { 1.0 };
            let dist = Normal::new(mean, sd).unwrap();
            values.push(dist.sample(&mut rng_pos));
        }
        labels.push(1);
    }
    Dataset::new(columns, LABEL_COLUMN, values, labels).expect("generator produces finite values")
}

/// Pearson correlation matrix over all feature columns.
pub fn pearson_correlation(d: &Dataset) -> Result<Vec<Vec<f64>>> {
    let dim = d.n_features();
    let n = d.n_rows() as f64;
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for (j, name) in d.columns().iter().enumerate() {
        let raw = d.column(j);
        let m = mean(&raw);
        let col: Vec<f64> = raw.iter().map(|v| v - m).collect();
        let ss: f64 = col.iter().map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(Error::ConstantColumn { name: name.clone() });
        }
        centered.push(col);
    }
    let sds: Vec<f64> = centered
        .iter()
        .map(|c| (c.iter().map(|v| v * v).sum::<f64>() / n).sqrt())
        .collect();
    let mut out = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        out[i][i] = 1.0;
        for j in i + 1..dim {
            let cov: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n;
            let r = (cov / (sds[i] * sds[j])).clamp(-1.0, 1.0);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// Formats a value the way the CSV writer does: shortest representation
/// that parses back to the same f64.
pub fn format_value(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

/// Reads a strict comma-separated file against an expected schema.
/// The header must match exactly; every cell must be a finite number and
/// the label column must be 0 or 1.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_path(path)?;
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::InvalidParameter(e.to_string()))?,
        None => return Err(Error::EmptyFile { path: display }),
    };
    let found: Vec<String> = header.iter().map(|s| s.trim().to_string()).collect();
    if found != schema.columns {
        return Err(Error::SchemaMismatch {
            path: display,
            expected: schema.columns.join(","),
            found: found.join(","),
        });
    }

    let label_idx = schema
        .columns
        .iter()
        .position(|c| *c == schema.label)
        .expect("schema validated");
    let feature_cols: Vec<usize> = (0..schema.columns.len())
        .filter(|&j| j != label_idx)
        .collect();
    let columns: Vec<String> = feature_cols
        .iter()
        .map(|&j| schema.columns[j].clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    // Row numbers are 1-based over data rows, matching how people count
    // lines below the header.
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let row_no = i + 1;
        if rec.len() != schema.columns.len() {
            return Err(Error::RaggedRow {
                row: row_no,
                expected: schema.columns.len(),
                found: rec.len(),
            });
        }
        for &j in &feature_cols {
            let cell = rec[j].trim();
            let v: f64 = cell.parse().map_err(|_| Error::BadCell {
                row: row_no,
                column: schema.columns[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: row_no,
                    column: schema.columns[j].clone(),
                });
            }
            values.push(v);
        }
        let cell = rec[label_idx].trim();
        let lv: f64 = cell.parse().map_err(|_| Error::BadCell {
            row: row_no,
            column: schema.label.clone(),
            value: cell.to_string(),
        })?;
        if lv == 0.0 {
            labels.push(0);
        } else if lv == 1.0 {
            labels.push(1);
        } else {
            return Err(Error::BadLabel {
                row: row_no,
                value: cell.to_string(),
            });
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyFile { path: display });
    }
    Dataset::new(columns, schema.label.clone(), values, labels)
}

/// Writes the dataset as CSV: feature columns in order, label last.
pub fn write_csv<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    let mut header: Vec<&str> = d.columns().iter().map(|s| s.as_str()).collect();
    header.push(d.label_name());
    writeln!(w, "{}", header.join(","))?;
    for i in 0..d.n_rows() {
        let mut line = String::new();
        for (j, v) in d.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_value(*v));
        }
        let _ = write!(line, ",{}", d.label(i));
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the dataset to a file; see [`write_csv`].
pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(d, file)
}

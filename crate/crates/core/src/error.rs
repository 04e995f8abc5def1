//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: file is empty")]
    EmptyFile { path: String },

    #[error("{path}: header mismatch: expected columns [{expected}], found [{found}]")]
    SchemaMismatch {
        path: String,
        expected: String,
        found: String,
    },

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: label '{value}' is not 0 or 1")]
    BadLabel { row: usize, value: String },

    #[error("row {row}, column '{column}': value is not finite")]
    NonFinite { row: usize, column: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown column '{name}'")]
    UnknownColumn { name: String },

    #[error("column '{name}' appears more than once")]
    DuplicateColumn { name: String },

    #[error("cannot drop the label column '{name}'")]
    DropLabel { name: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("labels must contain only 0 and 1")]
    NonBinaryLabel,

    #[error("row length {found} does not match {expected} feature columns")]
    RowWidth { expected: usize, found: usize },

    #[error("label count {labels} does not match row count {rows}")]
    LabelCount { rows: usize, labels: usize },

    #[error("t-test needs at least two values per group (got {a} and {b})")]
    TooFewSamples { a: usize, b: usize },

    #[error("t-test is undefined: both groups are constant and equal")]
    DegenerateTTest,

    #[error("column '{name}' is constant; correlation is undefined")]
    ConstantColumn { name: String },

    #[error("class {label} has {count} rows; stratification needs at least 2")]
    UnsatisfiableStratification { label: u8, count: usize },

    #[error("dataset has no {class} rows")]
    MissingClass { class: &'static str },

    #[error("k = {k} exceeds the {available} available points")]
    KTooLarge { k: usize, available: usize },

    #[error(
        "SMOTE needs at least 2 minority rows and k <= minority-1 (minority {minority}, k {k})"
    )]
    InsufficientMinority { minority: usize, k: usize },

    #[error(
        "no candidate subset was accepted after {iterations} iterations; \
         retry with different tmax/fmin thresholds"
    )]
    EmptySelection { iterations: usize },

    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class counts are both zero; impurity is undefined")]
    EmptyCounts,

    #[error("training data must contain both classes")]
    SingleClass,

    #[error("newton solver did not converge: gradient norm {gradient_norm:.3e} after {iterations} iterations")]
    NonConvergence {
        gradient_norm: f64,
        iterations: usize,
    },

    #[error("scores must be finite")]
    NonFiniteScore,

    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("coalition sample cannot identify attributions; increase n_coalitions (have {have}, need at least {need})")]
    InsufficientCoalitions { have: usize, need: usize },

    #[error("background dataset is empty")]
    EmptyBackground,

    #[error("model was fitted on features [{model}], data has [{data}]")]
    FeatureNameMismatch { model: String, data: String },

    #[error("feature '{name}' not found in the supplied columns")]
    MissingFeature { name: String },

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    ModelVersion { found: u32, supported: u32 },

    #[error("{0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by malformed input files or configuration
    /// rather than by a runtime failure. The CLI maps these to exit code 2.
    pub fn is_usage(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::NonConvergence { .. } | Error::EmptySelection { .. }
        )
    }
}

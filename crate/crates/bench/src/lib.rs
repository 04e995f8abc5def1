//! Fixture builders shared by the benchmarks.

use txanomaly_core::dataset::{gen_synthetic, Dataset};

/// Mid-sized imbalanced training set.
pub fn imbalanced(n_major: usize, n_minor: usize) -> Dataset {
    gen_synthetic(n_major, n_minor, 3.0, 42)
}

/// Scores and labels for the metric benches.
pub fn scored_labels(n: usize) -> (Vec<u8>, Vec<f64>) {
    let d = gen_synthetic(n / 2, n / 2, 2.0, 7);
    let labels = d.labels().to_vec();
    let scores: Vec<f64> = (0..d.n_rows()).map(|i| d.row(i)[3] / 100.0).collect();
    (labels, scores)
}

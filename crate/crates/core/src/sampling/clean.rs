//! Neighbourhood cleaning: Edited Nearest Neighbours, Tomek-link removal,
//! and the combined SMOTE pipelines built from them.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{Metric, NeighborIndex};
use crate::sampling::{require_both_classes, smote};

/// ENN: one pass over the original dataset removing every row whose k
/// nearest neighbours (self excluded) are majority-voted to the other
/// label. All removals are decided against the original data, then applied
/// at once.
pub fn enn_clean(d: &Dataset, k: usize) -> Result<Dataset> {
    if d.n_rows() <= k {
        return Err(Error::KTooLarge {
            k,
            available: d.n_rows().saturating_sub(1),
        });
    }
    let index = NeighborIndex::from_dataset(d, Metric::Euclidean);
    let mut keep = Vec::with_capacity(d.n_rows());
    for i in 0..d.n_rows() {
        let neighbors = index.query_excluding(d.row(i), k, i)?;
        let differing = neighbors
            .iter()
            .filter(|&&j| d.label(j) != d.label(i))
            .count();
        // Removed only when a strict majority of the neighbourhood holds
        // the other label; an even split keeps the row.
        if differing * 2 <= k {
            keep.push(i);
        }
    }
    Ok(d.subset(&keep))
}

/// Tomek links: cross-class pairs that are mutual single nearest
/// neighbours. The majority-class member of every link is removed (ties in
/// the class sizes treat the non-anomalous class as the majority).
pub fn tomek_remove(d: &Dataset) -> Result<Dataset> {
    require_both_classes(d)?;
    let index = NeighborIndex::from_dataset(d, Metric::Euclidean);
    let nn: Vec<usize> = (0..d.n_rows())
        .map(|i| index.query_excluding(d.row(i), 1, i).map(|v| v[0]))
        .collect::<Result<_>>()?;

    let (neg, pos) = d.class_counts();
    let majority_label = if pos > neg { 1 } else { 0 };

    let mut removed = vec![false; d.n_rows()];
    for a in 0..d.n_rows() {
        let b = nn[a];
        if a < b && nn[b] == a && d.label(a) != d.label(b) {
            let victim = if d.label(a) == majority_label { a } else { b };
            removed[victim] = true;
        }
    }
    let keep: Vec<usize> = (0..d.n_rows()).filter(|&i| !removed[i]).collect();
    Ok(d.subset(&keep))
}

/// SMOTE followed by ENN cleaning of the combined output.
pub fn smote_enn(train: &Dataset, k_smote: usize, k_enn: usize, seed: u64) -> Result<Dataset> {
    let oversampled = smote(train, k_smote, seed)?;
    enn_clean(&oversampled.dataset, k_enn)
}

/// SMOTE followed by Tomek-link removal on the combined output.
pub fn smote_tomek(train: &Dataset, k_smote: usize, seed: u64) -> Result<Dataset> {
    let oversampled = smote(train, k_smote, seed)?;
    tomek_remove(&oversampled.dataset)
}

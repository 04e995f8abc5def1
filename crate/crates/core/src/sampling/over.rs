//! SMOTE and ADASYN synthetic over-sampling. Both generate minority rows
//! by interpolating between a minority row and one of its k nearest
//! minority neighbours; ADASYN additionally concentrates generation on
//! rows whose neighbourhoods are dominated by the majority class.

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{Metric, NeighborIndex};
use crate::rng::seeded_rng;
use crate::sampling::{minority_label, minority_majority_counts};

/// Provenance of one synthetic row: the two parent rows (indices into the
/// input dataset) and the interpolation factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRecord {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

/// `base + lambda * (neighbor - base)`, coordinate-wise.
pub fn lerp_row(base: &[f64], neighbor: &[f64], lambda: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(a, b)| a + lambda * (b - a))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    pub dataset: Dataset,
    pub synthetics: Vec<SyntheticRecord>,
}

#[derive(Debug, Clone)]
pub struct AdasynOutput {
    pub dataset: Dataset,
    pub synthetics: Vec<SyntheticRecord>,
    pub uniform_fallback: bool,
}

struct MinorityNeighbors {
    min_label: u8,
    min_idx: Vec<usize>,
    neighbor_lists: Vec<Vec<usize>>,
}

/// k nearest minority neighbours (global indices) of every minority row.
fn minority_neighbors(train: &Dataset, k: usize) -> Result<MinorityNeighbors> {
    let min_label = minority_label(train);
    let min_idx = train.class_indices(min_label);
    let (min_count, _) = minority_majority_counts(train);
    if min_count < 2 || k == 0 || k > min_count - 1 {
        return Err(Error::InsufficientMinority {
            minority: min_count,
            k,
        });
    }
    let d = train.n_features();
    let mut matrix = Vec::with_capacity(min_idx.len() * d);
    for &i in &min_idx {
        matrix.extend_from_slice(train.row(i));
    }
    let index = NeighborIndex::new(&matrix, min_idx.len(), d, Metric::Euclidean);
    let mut neighbor_lists = Vec::with_capacity(min_idx.len());
    for (local, &global) in min_idx.iter().enumerate() {
        let found = index.query_excluding(train.row(global), k, local)?;
        neighbor_lists.push(found.into_iter().map(|l| min_idx[l]).collect());
    }
    Ok(MinorityNeighbors {
        min_label,
        min_idx,
        neighbor_lists,
    })
}

fn generate(
    train: &Dataset,
    nn: &MinorityNeighbors,
    counts: &[usize],
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (Dataset, Vec<SyntheticRecord>) {
    let mut out = train.clone();
    let mut records = Vec::new();
    for (local, &base) in nn.min_idx.iter().enumerate() {
        for _ in 0..counts[local] {
            let list = &nn.neighbor_lists[local];
            let neighbor = list[rng.random_range(0..list.len())];
            let lambda: f64 = rng.random();
            let row = lerp_row(train.row(base), train.row(neighbor), lambda);
            out.push_row(&row, nn.min_label);
            records.push(SyntheticRecord {
                base,
                neighbor,
                lambda,
            });
        }
    }
    (out, records)
}

/// SMOTE: synthesizes minority rows round-robin until the classes are
/// equal. Every synthetic row lies on the segment between its base row and
/// one of that row's k nearest minority neighbours.
pub fn smote(train: &Dataset, k: usize, seed: u64) -> Result<SmoteOutput> {
    let nn = minority_neighbors(train, k)?;
    let (min_count, maj_count) = minority_majority_counts(train);
    let gap = maj_count - min_count;

    let mut rng = seeded_rng(seed);
    let mut out = train.clone();
    let mut records = Vec::with_capacity(gap);
    // Generation cycles round-robin over the minority rows in row order
    // until the class counts are equal.
    for s in 0..gap {
        let local = s % nn.min_idx.len();
        let base = nn.min_idx[local];
        let list = &nn.neighbor_lists[local];
        let neighbor = list[rng.random_range(0..list.len())];
        let lambda: f64 = rng.random();
        let row = lerp_row(train.row(base), train.row(neighbor), lambda);
        out.push_row(&row, nn.min_label);
        records.push(SyntheticRecord {
            base,
            neighbor,
            lambda,
        });
    }
    Ok(SmoteOutput {
        dataset: out,
        synthetics: records,
    })
}

/// Largest-remainder rounding of `share_i * total` so the parts sum to
/// `total` exactly.
pub(crate) fn allocate_synthetics(shares: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    let quotas: Vec<f64> = if sum == 0.0 {
        vec![total as f64 / shares.len() as f64; shares.len()]
    } else {
        shares.iter().map(|r| r / sum * total as f64).collect()
    };
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    if assigned < total {
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(total - assigned) {
            counts[i] += 1;
        }
    } else if assigned > total {
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            ra.total_cmp(&rb).then(a.cmp(&b))
        });
        let mut excess = assigned - total;
        for &i in &order {
            if excess == 0 {
                break;
            }
            if counts[i] > 0 {
                counts[i] -= 1;
                excess -= 1;
            }
        }
    }
    counts
}

/// ADASYN: allocates the `majority - minority` synthetic budget across
/// minority rows proportionally to the fraction of majority rows among
/// each row's k nearest neighbours in the full feature space.
pub fn adasyn(train: &Dataset, k: usize, seed: u64) -> Result<AdasynOutput> {
    let (min_count, maj_count) = minority_majority_counts(train);
    if min_count < 2 {
        return Err(Error::InsufficientMinority {
            minority: min_count,
            k,
        });
    }
    let gap = maj_count - min_count;
    if gap == 0 {
        return Ok(AdasynOutput {
            dataset: train.clone(),
            synthetics: Vec::new(),
            uniform_fallback: false,
        });
    }

    let min_label = minority_label(train);
    let min_idx = train.class_indices(min_label);
    let full = NeighborIndex::from_dataset(train, Metric::Euclidean);
    let k_diff = k.min(train.n_rows() - 1).max(1);
    let mut ratios = Vec::with_capacity(min_idx.len());
    for &i in &min_idx {
        let neighbors = full.query_excluding(train.row(i), k_diff, i)?;
        let majority = neighbors
            .iter()
            .filter(|&&j| train.label(j) != min_label)
            .count();
        ratios.push(majority as f64 / k_diff as f64);
    }
    let uniform_fallback = ratios.iter().all(|&r| r == 0.0);
    let counts = allocate_synthetics(&ratios, gap);
    debug_assert_eq!(counts.iter().sum::<usize>(), gap);

    let k_gen = k.min(min_count - 1).max(1);
    let nn = minority_neighbors(train, k_gen)?;
    let mut rng = seeded_rng(seed);
    let (dataset, synthetics) = generate(train, &nn, &counts, &mut rng);
    Ok(AdasynOutput {
        dataset,
        synthetics,
        uniform_fallback,
    })
}

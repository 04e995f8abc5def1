//! Exact k-nearest-neighbour search over a borrowed point matrix.
//! This is the kernel every distance-based sampler shares, so it is kept
//! allocation-light: a bounded max-heap instead of a full sort.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

/// Candidate ordering: nondecreasing distance, ties broken by the lower
/// row index. Euclidean comparisons use squared distances, which order
/// identically and skip the square root.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    idx: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Immutable view over an `n_rows x n_cols` matrix supporting exact
/// k-nearest queries. Safe to share across threads.
pub struct NeighborIndex<'a> {
    points: &'a [f64],
    n_rows: usize,
    n_cols: usize,
    metric: Metric,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a [f64], n_rows: usize, n_cols: usize, metric: Metric) -> Self {
        assert_eq!(points.len(), n_rows * n_cols, "matrix shape mismatch");
        NeighborIndex {
            points,
            n_rows,
            n_cols,
            metric,
        }
    }

    pub fn from_dataset(d: &'a Dataset, metric: Metric) -> Self {
        NeighborIndex::new(d.values(), d.n_rows(), d.n_features(), metric)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Distance used for ordering (squared Euclidean, or L1).
    pub fn distance(&self, i: usize, query: &[f64]) -> f64 {
        let row = self.row(i);
        match self.metric {
            Metric::Euclidean => row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(),
            Metric::Manhattan => row.iter().zip(query).map(|(a, b)| (a - b).abs()).sum(),
        }
    }

    /// The k nearest rows to `query`, sorted by nondecreasing distance with
    /// ties broken by lower row index.
    pub fn query(&self, query: &[f64], k: usize) -> Result<Vec<usize>> {
        self.query_where(query, k, |_| true)
    }

    /// Same as [`query`](Self::query) but never returns `exclude` (used for
    /// self-excluding neighbourhoods).
    pub fn query_excluding(&self, query: &[f64], k: usize, exclude: usize) -> Result<Vec<usize>> {
        self.query_where(query, k, |i| i != exclude)
    }

    /// The k nearest rows among those accepted by `keep`.
    pub fn query_where(
        &self,
        query: &[f64],
        k: usize,
        keep: impl Fn(usize) -> bool,
    ) -> Result<Vec<usize>> {
        assert_eq!(query.len(), self.n_cols, "query dimension mismatch");
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let mut eligible = 0usize;
        for i in 0..self.n_rows {
            if !keep(i) {
                continue;
            }
            eligible += 1;
            let cand = Candidate {
                dist: self.distance(i, query),
                idx: i,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if let Some(top) = heap.peek() {
                if cand < *top {
                    heap.pop();
                    heap.push(cand);
                }
            }
        }
        if k > eligible {
            return Err(Error::KTooLarge {
                k,
                available: eligible,
            });
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        Ok(out.into_iter().map(|c| c.idx).collect())
    }
}

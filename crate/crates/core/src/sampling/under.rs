//! Random under-sampling and the NearMiss-1 variant described for this
//! pipeline: keep each minority row's closest majority row, filling from
//! the next-closest unmarked majority rows until the classes balance.

use rand::seq::index::sample;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::knn::{Metric, NeighborIndex};
use crate::rng::seeded_rng;
use crate::sampling::{minority_label, require_both_classes};

/// Keeps every minority row plus a uniformly drawn majority subset of the
/// same size (balance ratio 1).
pub fn random_undersample(train: &Dataset, seed: u64) -> Result<Dataset> {
    require_both_classes(train)?;
    let min_label = minority_label(train);
    let min_idx = train.class_indices(min_label);
    let maj_idx = train.class_indices(1 - min_label);

    let mut rng = seeded_rng(seed);
    let chosen = sample(&mut rng, maj_idx.len(), min_idx.len());
    let mut keep: Vec<usize> = min_idx;
    keep.extend(chosen.iter().map(|p| maj_idx[p]));
    keep.sort_unstable();
    Ok(train.subset(&keep))
}

/// NearMiss-1: marks, for each minority row, its single nearest majority
/// row (Euclidean). The output holds all minority rows plus the marked
/// majority rows; when collisions leave the marked set short, the closest
/// unmarked majority rows (by distance to the minority class) are added
/// until the class counts match.
pub fn near_miss_1(train: &Dataset) -> Result<Dataset> {
    require_both_classes(train)?;
    let min_label = minority_label(train);
    let min_idx = train.class_indices(min_label);
    let maj_idx = train.class_indices(1 - min_label);

    let d = train.n_features();
    let mut maj_matrix = Vec::with_capacity(maj_idx.len() * d);
    for &i in &maj_idx {
        maj_matrix.extend_from_slice(train.row(i));
    }
    let index = NeighborIndex::new(&maj_matrix, maj_idx.len(), d, Metric::Euclidean);

    let mut marked = vec![false; maj_idx.len()];
    for &i in &min_idx {
        let nearest = index.query(train.row(i), 1)?[0];
        marked[nearest] = true;
    }
    let mut kept_local: Vec<usize> = (0..maj_idx.len()).filter(|&j| marked[j]).collect();

    if kept_local.len() < min_idx.len() {
        // Rank the unmarked majority rows by their distance to the
        // minority class; ties fall back to the lower row index.
        let mut candidates: Vec<(f64, usize)> = (0..maj_idx.len())
            .filter(|&j| !marked[j])
            .map(|j| {
                let row = &maj_matrix[j * d..(j + 1) * d];
                let dist = min_idx
                    .iter()
                    .map(|&i| {
                        train
                            .row(i)
                            .iter()
                            .zip(row)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                (dist, j)
            })
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, j) in candidates {
            if kept_local.len() == min_idx.len() {
                break;
            }
            kept_local.push(j);
        }
    }

    let mut keep: Vec<usize> = min_idx.clone();
    keep.extend(kept_local.iter().map(|&j| maj_idx[j]));
    keep.sort_unstable();
    Ok(train.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_synthetic;
    use std::collections::HashSet;

    fn points(rows: &[(f64, f64, u8)]) -> Dataset {
        let pairs: Vec<(Vec<f64>, u8)> = rows.iter().map(|&(x, y, l)| (vec![x, y], l)).collect();
        let borrowed: Vec<(&[f64], u8)> = pairs.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        Dataset::from_rows(vec!["x".into(), "y".into()], "label", &borrowed).unwrap()
    }

    #[test]
    fn rus_balances_and_is_seeded() {
        let d = gen_synthetic(1000, 10, 3.0, 4);
        let a = random_undersample(&d, 7).unwrap();
        assert_eq!(a.n_rows(), 20);
        assert_eq!(a.class_counts(), (10, 10));
        let b = random_undersample(&d, 7).unwrap();
        assert_eq!(a, b);
        assert!(random_undersample(&d, 8).unwrap() != a);

        // Selected majority rows really come from the input majority rows.
        let input_rows: HashSet<Vec<u64>> = (0..d.n_rows())
            .filter(|&i| d.label(i) == 0)
            .map(|i| d.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        for i in 0..a.n_rows() {
            if a.label(i) == 0 {
                let key: Vec<u64> = a.row(i).iter().map(|v| v.to_bits()).collect();
                assert!(input_rows.contains(&key));
            }
        }
    }

    #[test]
    fn rus_requires_positives() {
        let d = points(&[(0.0, 0.0, 0), (1.0, 0.0, 0)]);
        assert!(random_undersample(&d, 1).is_err());
    }

    #[test]
    fn near_miss_keeps_closest_majority() {
        let d = points(&[(0.0, 0.0, 1), (1.0, 0.0, 0), (2.0, 0.0, 0), (3.0, 0.0, 0)]);
        let out = near_miss_1(&d).unwrap();
        assert_eq!(out.class_counts(), (1, 1));
        let kept_majority: Vec<&[f64]> = (0..out.n_rows())
            .filter(|&i| out.label(i) == 0)
            .map(|i| out.row(i))
            .collect();
        assert_eq!(kept_majority, vec![&[1.0, 0.0][..]]);
    }

    #[test]
    fn near_miss_fills_on_collision() {
        // Both minority rows share (5,0) as their nearest majority row;
        // the fill rule must add the next closest, (7,0).
        let d = points(&[
            (4.0, 0.0, 1),
            (6.0, 0.0, 1),
            (5.0, 0.0, 0),
            (7.0, 0.0, 0),
            (20.0, 0.0, 0),
        ]);
        let out = near_miss_1(&d).unwrap();
        assert_eq!(out.class_counts(), (2, 2));
        let kept: Vec<f64> = (0..out.n_rows())
            .filter(|&i| out.label(i) == 0)
            .map(|i| out.row(i)[0])
            .collect();
        assert_eq!(kept, vec![5.0, 7.0]);
    }

    #[test]
    fn near_miss_output_contains_minority() {
        let d = gen_synthetic(400, 25, 2.0, 6);
        let out = near_miss_1(&d).unwrap();
        let minority: HashSet<Vec<u64>> = (0..d.n_rows())
            .filter(|&i| d.label(i) == 1)
            .map(|i| d.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        let kept: HashSet<Vec<u64>> = (0..out.n_rows())
            .filter(|&i| out.label(i) == 1)
            .map(|i| out.row(i).iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(minority, kept);
        assert_eq!(out.class_counts(), (25, 25));
    }
}

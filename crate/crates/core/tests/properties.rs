//! Property tests for the algebraic invariants that hold for any input,
//! not just the worked examples.

use proptest::prelude::*;

use txanomaly_core::dataset::{
    dedup_majority, pearson_correlation, stratified_split, welch_t_test, Dataset,
};
use txanomaly_core::metrics::roc_auc;
use txanomaly_core::sampling::{adasyn, near_miss_1, random_undersample, smote, smote_tomek};

fn dataset_strategy(max_rows: usize) -> impl Strategy<Value = Dataset> {
    (4..max_rows).prop_flat_map(|n| {
        (
            proptest::collection::vec(-50i32..50, n * 2),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(cells, labels)| {
                let values: Vec<f64> = cells.iter().map(|&v| v as f64 / 4.0).collect();
                let mut labels: Vec<u8> = labels.iter().map(|&b| b as u8).collect();
                // Keep both classes populated.
                labels[0] = 0;
                labels[1] = 0;
                labels[2] = 1;
                labels[3] = 1;
                Dataset::new(vec!["a".into(), "b".into()], "label", values, labels).unwrap()
            })
    })
}

fn row_multiset(d: &Dataset) -> Vec<(Vec<u64>, u8)> {
    let mut rows: Vec<(Vec<u64>, u8)> = (0..d.n_rows())
        .map(|i| (d.row(i).iter().map(|v| v.to_bits()).collect(), d.label(i)))
        .collect();
    rows.sort();
    rows
}

proptest! {
    #[test]
    fn welch_is_antisymmetric(
        a in proptest::collection::vec(-100.0f64..100.0, 2..20),
        b in proptest::collection::vec(-100.0f64..100.0, 2..20),
    ) {
        let ab = welch_t_test(&a, &b);
        let ba = welch_t_test(&b, &a);
        match (ab, ba) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.t_value, -y.t_value);
                prop_assert_eq!(x.p_value, y.p_value);
                prop_assert_eq!(x.degrees_of_freedom, y.degrees_of_freedom);
            }
            (Err(_), Err(_)) => {}
            other => return Err(TestCaseError::fail(format!("asymmetric outcome: {other:?}"))),
        }
    }

    #[test]
    fn dedup_is_idempotent(d in dataset_strategy(40)) {
        let once = dedup_majority(&d);
        prop_assert_eq!(dedup_majority(&once), once);
    }

    #[test]
    fn split_union_restores_input(d in dataset_strategy(40), seed in any::<u64>()) {
        let split = stratified_split(&d, 0.3, seed).unwrap();
        let mut combined = row_multiset(&split.train);
        combined.extend(row_multiset(&split.test));
        combined.sort();
        prop_assert_eq!(combined, row_multiset(&d));
    }

    #[test]
    fn auc_is_antisymmetric_for_distinct_scores(
        raw in proptest::collection::vec(0u32..1000, 4..60),
    ) {
        // Distinct scores: integer part from the value, fraction from the index.
        let scores: Vec<f64> = raw.iter().enumerate()
            .map(|(i, &v)| v as f64 + i as f64 * 1e-4)
            .collect();
        let mut labels: Vec<u8> = raw.iter().map(|&v| (v % 2) as u8).collect();
        labels[0] = 0;
        labels[1] = 1;
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let (_, auc) = roc_auc(&labels, &scores).unwrap();
        let (_, flipped) = roc_auc(&labels, &negated).unwrap();
        prop_assert!((auc + flipped - 1.0).abs() < 1e-12);
    }

    #[test]
    fn auc_ignores_monotone_transforms(
        raw in proptest::collection::vec(0u32..8, 4..60),
    ) {
        let scores: Vec<f64> = raw.iter().map(|&v| v as f64 / 8.0).collect();
        let mut labels: Vec<u8> = raw.iter().map(|&v| (v % 3 == 0) as u8).collect();
        labels[0] = 0;
        labels[1] = 1;
        let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s + 1.0).exp()).collect();
        let (_, auc) = roc_auc(&labels, &scores).unwrap();
        let (_, same) = roc_auc(&labels, &transformed).unwrap();
        prop_assert!((auc - same).abs() < 1e-12);
    }

    #[test]
    fn correlation_survives_positive_rescale(
        d in dataset_strategy(30),
        scale in 0.01f64..100.0,
    ) {
        let base = pearson_correlation(&d);
        let scaled_values: Vec<f64> = (0..d.n_rows())
            .flat_map(|i| {
                let row = d.row(i);
                vec![row[0] * scale, row[1]]
            })
            .collect();
        let scaled = Dataset::new(
            d.columns().to_vec(),
            "label",
            scaled_values,
            d.labels().to_vec(),
        )
        .unwrap();
        let rescaled = pearson_correlation(&scaled);
        match (base, rescaled) {
            (Ok(a), Ok(b)) => prop_assert!((a[0][1] - b[0][1]).abs() < 1e-9),
            (Err(_), Err(_)) => {}
            other => return Err(TestCaseError::fail(format!("rescale changed outcome: {other:?}"))),
        }
    }

    #[test]
    fn samplers_preserve_minority_rows(d in dataset_strategy(40), seed in any::<u64>()) {
        let (neg, pos) = d.class_counts();
        prop_assume!(pos >= 2 && pos < neg);
        let minority: Vec<(Vec<u64>, u8)> = row_multiset(&d)
            .into_iter()
            .filter(|(_, l)| *l == 1)
            .collect();
        let mut outputs = vec![
            random_undersample(&d, seed).unwrap(),
            near_miss_1(&d).unwrap(),
        ];
        if pos >= 3 {
            let k = (pos - 1).min(3);
            outputs.push(smote(&d, k, seed).unwrap().dataset);
            outputs.push(adasyn(&d, k, seed).unwrap().dataset);
            outputs.push(smote_tomek(&d, k, seed).unwrap());
        }
        for out in outputs {
            let kept: Vec<(Vec<u64>, u8)> = row_multiset(&out)
                .into_iter()
                .filter(|(_, l)| *l == 1)
                .collect();
            // Original minority rows survive as a sub-multiset.
            let mut remaining = kept.clone();
            for row in &minority {
                let at = remaining.iter().position(|r| r == row);
                prop_assert!(at.is_some(), "minority row lost");
                remaining.remove(at.unwrap());
            }
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use peer_eval::scoring::consistency_factor;
use peer_eval::{
    auxiliary_matrix, evaluation_error, impute_missing, main_mechanism, normalize_columns,
    run_mechanism, truthful_matrix, validate_matrix, ContributionVector, EvaluationMatrix,
    ExtendedRatio, InstructorWeights, MechanismKind, ScoreWeights,
};
use proptest::prelude::*;

fn interior_truth(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ContributionVector> {
    n.prop_flat_map(|n| prop::collection::vec(0.05f64..1.0, n))
        .prop_map(|raw| ContributionVector::from_unnormalized(raw).unwrap())
}

/// Zero diagonal, off-diagonal entries either 0 or in [0.01, 10].
fn sparse_matrix(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = EvaluationMatrix> {
    n.prop_flat_map(|n| {
        prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..10.0], n * n)
    })
    .prop_map(|flat| {
        let n = (flat.len() as f64).sqrt() as usize;
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { flat[i * n + j] })
                    .collect()
            })
            .collect();
        EvaluationMatrix::from_rows(rows).unwrap()
    })
}

fn positive_columns(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = EvaluationMatrix> {
    n.prop_flat_map(|n| prop::collection::vec(0.01f64..10.0, n * n))
        .prop_map(|flat| {
            let n = (flat.len() as f64).sqrt() as usize;
            EvaluationMatrix::from_rows(flat.chunks(n).map(|r| r.to_vec()).collect()).unwrap()
        })
}

fn weights(n: usize) -> impl Strategy<Value = InstructorWeights> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 5 => 0.01f64..5.0], n)
        .prop_map(|w| InstructorWeights::new(w).unwrap())
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent_and_scale_free(a in positive_columns(2..=8), j in 0usize..8, c in 0.01f64..100.0) {
        let j = j % a.n();
        let once = normalize_columns(&a).unwrap();
        let twice = normalize_columns(&once).unwrap();
        let scaled = normalize_columns(&a.with_scaled_column(j, c).unwrap()).unwrap();
        for i in 0..a.n() {
            for k in 0..a.n() {
                prop_assert!((once.get(i, k) - twice.get(i, k)).abs() < 1e-15);
                prop_assert!((once.get(i, k) - scaled.get(i, k)).abs() < 1e-15);
            }
            prop_assert!((once.column_sum(i) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn imputation_leaves_submitted_columns_alone(a in sparse_matrix(2..=8), mask in prop::collection::vec(any::<bool>(), 8)) {
        let n = a.n();
        let missing: BTreeSet<usize> = (0..n).filter(|&j| mask[j]).collect();
        prop_assume!(missing.len() < n);
        let (b, w) = impute_missing(&a, &missing, &InstructorWeights::uniform(n)).unwrap();
        for j in 0..n {
            if missing.contains(&j) {
                prop_assert!(!b.is_submitted(j));
                prop_assert_eq!(w[j], 0.0);
                prop_assert_eq!(b.get(j, j), 0.0);
                prop_assert!((0..n).filter(|&i| i != j).all(|i| b.get(i, j) == 1.0));
            } else {
                prop_assert_eq!(b.column(j), a.column(j));
                prop_assert_eq!(w[j], 1.0);
            }
        }
    }

    #[test]
    fn truthful_matrices_validate(t in interior_truth(2..=12)) {
        let a = truthful_matrix(&t, false).unwrap();
        prop_assert!(validate_matrix(a.rows(), true).is_ok());
        let with_self = truthful_matrix(&t, true).unwrap();
        prop_assert!(validate_matrix(with_self.rows(), false).is_ok());
    }

    #[test]
    fn reciprocity_and_unit_diagonal(a in sparse_matrix(3..=9), seed in prop::collection::vec(0.0f64..5.0, 9)) {
        let w = InstructorWeights::new(seed[..a.n()].to_vec()).unwrap();
        if let Ok(b) = auxiliary_matrix(&a, &w) {
            prop_assert_eq!(b.reciprocity_violation(), None);
            for i in 0..a.n() {
                prop_assert_eq!(b.get(i, i), ExtendedRatio::Finite(1.0));
                for j in 0..a.n() {
                    // Infinite one way means zero the other way.
                    if b.get(i, j) == ExtendedRatio::Infinite {
                        prop_assert_eq!(b.get(j, i), ExtendedRatio::Finite(0.0));
                    }
                    if b.get(i, j) == ExtendedRatio::Undefined {
                        prop_assert_eq!(b.get(j, i), ExtendedRatio::Undefined);
                    }
                }
            }
        }
    }

    #[test]
    fn auxiliary_matrix_ignores_column_scale(a in sparse_matrix(3..=8), j in 0usize..8, c in 0.01f64..100.0) {
        let j = j % a.n();
        let w = InstructorWeights::uniform(a.n());
        let before = auxiliary_matrix(&a, &w);
        let after = auxiliary_matrix(&a.with_scaled_column(j, c).unwrap(), &w);
        match (before, after) {
            (Ok(x), Ok(y)) => {
                for r in 0..a.n() {
                    for k in 0..a.n() {
                        match (x.get(r, k), y.get(r, k)) {
                            (ExtendedRatio::Finite(p), ExtendedRatio::Finite(q)) => prop_assert!(rel_close(p, q, 1e-12), "{} vs {}", p, q),
                            (p, q) => prop_assert_eq!(p, q),
                        }
                    }
                }
            }
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn truthful_reports_are_recovered(
        t in interior_truth(3..=12),
        raw_w in prop::collection::vec(0.01f64..10.0, 12),
        scales in prop::collection::vec(0.01f64..100.0, 12),
    ) {
        let n = t.len();
        let w = InstructorWeights::new(raw_w[..n].to_vec()).unwrap();
        let mut a = truthful_matrix(&t, false).unwrap();
        for (j, &c) in scales[..n].iter().enumerate() {
            a = a.with_scaled_column(j, c).unwrap();
        }
        let s = run_mechanism(MechanismKind::AuxiliaryWeighted, &a, &w).unwrap();
        prop_assert!(s.max_abs_diff(t.as_slice()) < 1e-9);
    }

    #[test]
    fn main_mechanism_output_sums_to_one(a in sparse_matrix(3..=9), w in weights(9)) {
        let w = InstructorWeights::new(w.as_slice()[..a.n()].to_vec()).unwrap();
        if let Ok(b) = auxiliary_matrix(&a, &w) {
            if let Ok(s) = main_mechanism(&b) {
                prop_assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(s.as_slice().iter().all(|&v| v >= 0.0));
            }
        }
    }

    #[test]
    fn relabeling_students_permutes_output(a in sparse_matrix(3..=7), shift in 1usize..7) {
        let n = a.n();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let rows = (0..n).map(|i| (0..n).map(|j| a.get(perm[i], perm[j])).collect()).collect();
        let relabeled = EvaluationMatrix::from_rows(rows).unwrap();
        let w = InstructorWeights::uniform(n);
        let s = run_mechanism(MechanismKind::AuxiliaryWeighted, &a, &w);
        let s2 = run_mechanism(MechanismKind::AuxiliaryWeighted, &relabeled, &w);
        match (s, s2) {
            (Ok(s), Ok(s2)) => {
                for i in 0..n {
                    prop_assert!((s2[i] - s[perm[i]]).abs() < 1e-12);
                }
            }
            (s, s2) => prop_assert_eq!(s.is_err(), s2.is_err()),
        }
    }

    #[test]
    fn evaluation_error_ignores_column_scale(a in positive_columns(3..=8), c in 0.01f64..100.0) {
        let s = ContributionVector::uniform(a.n());
        let e = evaluation_error(&a, &s, 0).unwrap();
        let e2 = evaluation_error(&a.with_scaled_column(0, c).unwrap(), &s, 0).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((e - e2).abs() < 1e-12);
    }

    #[test]
    fn final_score_monotone(
        share in 0.0f64..1.0, grade in 0.0f64..1.0, err in 0.0f64..3.0,
        d in 0.0f64..0.5, c in 0.0f64..0.3,
    ) {
        let w = ScoreWeights::new(1.0 - 0.05 - c, 0.05, c).unwrap();
        let base = w.combine(share, grade, err);
        prop_assert!(w.combine(share, grade, err + d) <= base + 1e-15);
        prop_assert!(w.combine(share + d, grade, err) >= base - 1e-15);
        prop_assert!(w.combine(share, grade + d, err) >= base - 1e-15);
        let bonus = w.consistency_weight * consistency_factor(err);
        prop_assert!((0.0..=w.consistency_weight).contains(&bonus));
    }
}

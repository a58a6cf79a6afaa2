// SPDX-License-Identifier: Apache-2.0

//! Peer evaluation mechanisms.
//!
//! Each mechanism maps an [`EvaluationMatrix`] to a [`ContributionVector`].
//! The two pie mechanisms average column-normalized evaluations. The
//! auxiliary mechanism first estimates pairwise ratios `b_ij` from the
//! judgements of third parties `k != i, j`, weighted by the instructor's
//! grade for `k`'s reports, then averages the normalized fully-finite
//! columns of that ratio matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    normalize_columns, ContributionVector, EvaluationMatrix, InstructorWeights,
};
use crate::ratio::{AuxiliaryMatrix, ExtendedRatio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// Everyone splits a pie among all members, themselves included.
    PieToAll,
    /// Everyone splits a pie among their teammates only.
    PieToOthers,
    /// Instructor-weighted auxiliary matrix of pairwise ratios.
    #[serde(rename = "auxiliary")]
    AuxiliaryWeighted,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 3] = [
        MechanismKind::PieToAll,
        MechanismKind::PieToOthers,
        MechanismKind::AuxiliaryWeighted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismKind::PieToAll => "pie-to-all",
            MechanismKind::PieToOthers => "pie-to-others",
            MechanismKind::AuxiliaryWeighted => "auxiliary",
        }
    }

    /// Whether the mechanism reads self-evaluations.
    pub fn uses_self_evaluation(self) -> bool {
        matches!(self, MechanismKind::PieToAll)
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        MechanismKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                format!("unknown mechanism `{s}`, expected pie-to-all, pie-to-others or auxiliary")
            })
    }
}

fn row_averages(a: &EvaluationMatrix) -> Result<ContributionVector> {
    let n = a.n() as f64;
    let s = (0..a.n())
        .map(|i| a.row(i).iter().sum::<f64>() / n)
        .collect();
    ContributionVector::new(s)
}

/// `s_i = (1/n) sum_j a_ij` over column-normalized evaluations, self included.
pub fn pie_to_all(a: &EvaluationMatrix) -> Result<ContributionVector> {
    row_averages(&normalize_columns(a)?)
}

/// Same average as [`pie_to_all`], but self-evaluations must be zero.
pub fn pie_to_others(a: &EvaluationMatrix) -> Result<ContributionVector> {
    a.check_zero_diagonal()?;
    row_averages(&normalize_columns(a)?)
}

/// Weighted ratio matrix:
///
/// ```text
/// b_ij = sum_k w_k a_ik / (a_ik + a_jk)  /  sum_k w_k a_jk / (a_ik + a_jk),   k != i, j
/// ```
///
/// Terms with `a_ik + a_jk == 0` are skipped. Pass uniform weights for the
/// unweighted variant. Diagonal entries of `a` are never read.
pub fn auxiliary_matrix(a: &EvaluationMatrix, w: &InstructorWeights) -> Result<AuxiliaryMatrix> {
    let n = a.n();
    if n < 3 {
        return Err(Error::TeamTooSmall { n });
    }
    if w.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: w.len(),
        });
    }

    let mut entries = vec![ExtendedRatio::Undefined; n * n];
    let mut any_defined = false;
    for i in 0..n {
        entries[i * n + i] = ExtendedRatio::Finite(1.0);
        for j in (i + 1)..n {
            let (mut share_i, mut share_j) = (0.0, 0.0);
            for k in (0..n).filter(|&k| k != i && k != j) {
                let (a_ik, a_jk) = (a.get(i, k), a.get(j, k));
                let combined = a_ik + a_jk;
                if combined == 0.0 {
                    continue;
                }
                share_i += w[k] * a_ik / combined;
                share_j += w[k] * a_jk / combined;
            }
            let b_ij = ExtendedRatio::from_parts(share_i, share_j);
            let b_ji = ExtendedRatio::from_parts(share_j, share_i);
            any_defined |= b_ij != ExtendedRatio::Undefined;
            entries[i * n + j] = b_ij;
            entries[j * n + i] = b_ji;
        }
    }
    if !any_defined {
        return Err(Error::NoInformedJudges);
    }
    Ok(AuxiliaryMatrix::from_entries(n, entries))
}

/// Unweighted average of the fully-finite columns of `b`, each scaled to sum
/// to one.
pub fn main_mechanism(b: &AuxiliaryMatrix) -> Result<ContributionVector> {
    let n = b.n();
    let mut total = vec![0.0; n];
    let mut used = 0usize;
    for j in 0..n {
        let Some(column) = b
            .column(j)
            .into_iter()
            .map(ExtendedRatio::finite)
            .collect::<Option<Vec<f64>>>()
        else {
            continue;
        };
        let sum: f64 = column.iter().sum();
        if !(sum > 0.0) {
            continue;
        }
        for (acc, v) in total.iter_mut().zip(&column) {
            *acc += v / sum;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoValidColumns);
    }
    ContributionVector::new(total.into_iter().map(|v| v / used as f64).collect())
}

/// Evaluations every student would report if all of them told the truth:
/// `a_ij = t_i / (1 - t_j)`. The diagonal is zero unless `self_evaluation`
/// is set, in which case `a_jj = t_j / (1 - t_j)` and each column is
/// proportional to `t`.
pub fn truthful_matrix(t: &ContributionVector, self_evaluation: bool) -> Result<EvaluationMatrix> {
    let n = t.len();
    if let Some(j) = (0..n).find(|&j| t[j] >= 1.0) {
        return Err(Error::DegenerateTruth(j));
    }
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j && !self_evaluation {
                        0.0
                    } else {
                        t[i] / (1.0 - t[j])
                    }
                })
                .collect()
        })
        .collect();
    EvaluationMatrix::from_rows(rows)
}

pub fn run_mechanism(
    kind: MechanismKind,
    a: &EvaluationMatrix,
    w: &InstructorWeights,
) -> Result<ContributionVector> {
    match kind {
        MechanismKind::PieToAll => pie_to_all(a),
        MechanismKind::PieToOthers => pie_to_others(a),
        MechanismKind::AuxiliaryWeighted => main_mechanism(&auxiliary_matrix(a, w)?),
    }
}

/// Conditions under which truthful reports are guaranteed to be recovered
/// exactly but which the input does not meet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreconditionWarning {
    /// Fewer than three students submitted evaluations and hold a positive grade.
    FewInformedJudges { count: usize },
}

impl fmt::Display for PreconditionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreconditionWarning::FewInformedJudges { count } => write!(
                f,
                "only {count} student(s) submitted evaluations with a positive report grade, \
                 at least 3 are needed for truthful reports to be recovered exactly"
            ),
        }
    }
}

pub fn accuracy_preconditions(
    a: &EvaluationMatrix,
    w: &InstructorWeights,
) -> Vec<PreconditionWarning> {
    let count = (0..a.n())
        .filter(|&k| a.is_submitted(k) && k < w.len() && w[k] > 0.0)
        .count();
    if count < 3 {
        vec![PreconditionWarning::FewInformedJudges { count }]
    } else {
        Vec::new()
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> EvaluationMatrix {
        EvaluationMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            assert!((g - w).abs() <= tol, "entry {i}: got {g}, want {w}");
        }
    }

    fn example1() -> EvaluationMatrix {
        matrix(&[
            &[0.0, 2.0 / 3.0, 2.0 / 3.0],
            &[0.5, 0.0, 1.0 / 3.0],
            &[0.5, 1.0 / 3.0, 0.0],
        ])
    }

    fn example5() -> EvaluationMatrix {
        matrix(&[&[0.0, 2.0, 2.0], &[3.0, 0.0, 3.0], &[5.0, 5.0, 0.0]])
    }

    fn example6() -> EvaluationMatrix {
        matrix(&[
            &[0.0, 1.0, 11.0, 1.0],
            &[2.0, 0.0, 19.0, 2.0],
            &[3.0, 1.0, 0.0, 3.0],
            &[4.0, 1.0, 39.0, 0.0],
        ])
    }

    #[test]
    fn pie_to_all_symmetric_pair() {
        let s = pie_to_all(&matrix(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
        assert_close(s.as_slice(), &[0.5, 0.5], 1e-15);
    }

    #[test]
    fn pie_to_all_selfish_profile_is_uniform() {
        let s = pie_to_all(&matrix(&[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]))
        .unwrap();
        assert_close(s.as_slice(), &[1.0 / 3.0; 3], 1e-15);
    }

    #[test]
    fn pie_to_all_recovers_replicated_truth() {
        let t = [0.2, 0.3, 0.5];
        let rows: Vec<Vec<f64>> = t.iter().map(|&ti| vec![ti; 3]).collect();
        let s = pie_to_all(&EvaluationMatrix::from_rows(rows).unwrap()).unwrap();
        assert_close(s.as_slice(), &t, 1e-12);
    }

    #[test]
    fn pie_to_others_is_inaccurate_on_example1() {
        let s = pie_to_others(&example1()).unwrap();
        assert_close(s.as_slice(), &[4.0 / 9.0, 5.0 / 18.0, 5.0 / 18.0], 1e-12);
        assert!(((s[0] - 0.5).abs() - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn pie_to_others_rewards_pair_doing_everything() {
        let a = matrix(&[&[0.0, 1.0, 0.5], &[1.0, 0.0, 0.5], &[0.0, 0.0, 0.0]]);
        let s = pie_to_others(&a).unwrap();
        assert_close(s.as_slice(), &[0.5, 0.5, 0.0], 1e-12);

        let zero_col = matrix(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(pie_to_others(&zero_col), Err(Error::ZeroColumn(2)));
    }

    #[test]
    fn pie_to_others_uniform_and_diagonal_guard() {
        let a = matrix(&[&[0.0, 0.5, 0.5], &[0.5, 0.0, 0.5], &[0.5, 0.5, 0.0]]);
        assert_close(
            pie_to_others(&a).unwrap().as_slice(),
            &[1.0 / 3.0; 3],
            1e-15,
        );
        let selfish = matrix(&[&[1.0, 0.5, 0.5], &[0.5, 0.0, 0.5], &[0.5, 0.5, 0.0]]);
        assert_eq!(pie_to_others(&selfish), Err(Error::NonzeroDiagonal(0)));
    }

    #[test]
    fn unweighted_auxiliary_matrix_example5() {
        let b = auxiliary_matrix(&example5(), &InstructorWeights::uniform(3)).unwrap();
        let want = [
            [1.0, 2.0 / 3.0, 2.0 / 5.0],
            [3.0 / 2.0, 1.0, 3.0 / 5.0],
            [5.0 / 2.0, 5.0 / 3.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let v = b.get(i, j).finite().unwrap();
                assert!((v - want[i][j]).abs() < 1e-12, "b[{i}][{j}] = {v}");
            }
        }
        let s = main_mechanism(&b).unwrap();
        assert_close(s.as_slice(), &[0.2, 0.3, 0.5], 1e-12);
    }

    #[test]
    fn weighted_auxiliary_matrix_example6() {
        let w = InstructorWeights::new(vec![4.0, 0.0, 1.0, 3.0]).unwrap();
        let b = auxiliary_matrix(&example6(), &w).unwrap();
        // Exact rationals of the printed matrix.
        let want = [
            [1.0, 41.0 / 79.0, 1.0 / 3.0, 11.0 / 39.0],
            [79.0 / 41.0, 1.0, 2.0 / 3.0, 289.0 / 581.0],
            [3.0, 1.5, 1.0, 0.75],
            [39.0 / 11.0, 581.0 / 289.0, 4.0 / 3.0, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                let v = b.get(i, j).finite().unwrap();
                assert!((v - want[i][j]).abs() < 1e-12, "b[{i}][{j}] = {v}");
            }
        }
    }

    #[test]
    fn auxiliary_needs_three_students() {
        let a = matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            auxiliary_matrix(&a, &InstructorWeights::uniform(2)),
            Err(Error::TeamTooSmall { n: 2 })
        );
    }

    #[test]
    fn zero_grades_leave_nothing_defined() {
        let w = InstructorWeights::new(vec![0.0; 3]).unwrap();
        assert_eq!(
            auxiliary_matrix(&example5(), &w),
            Err(Error::NoInformedJudges)
        );
    }

    #[test]
    fn manipulated_example_gives_47_over_180() {
        let b = AuxiliaryMatrix::from_finite_rows(&[
            vec![1.0, 1.0, 2.0],
            vec![1.0, 1.0, 1.0],
            vec![0.5, 1.0, 1.0],
        ]);
        let s = main_mechanism(&b).unwrap();
        let want = [
            (2.0 / 5.0 + 1.0 / 3.0 + 1.0 / 2.0) / 3.0,
            (2.0 / 5.0 + 1.0 / 3.0 + 1.0 / 4.0) / 3.0,
            47.0 / 180.0,
        ];
        assert_close(s.as_slice(), &want, 1e-12);
    }

    #[test]
    fn all_ones_is_uniform() {
        let b = AuxiliaryMatrix::from_finite_rows(&vec![vec![1.0; 4]; 4]);
        assert_close(main_mechanism(&b).unwrap().as_slice(), &[0.25; 4], 1e-15);
    }

    #[test]
    fn no_finite_column_fails() {
        let b = AuxiliaryMatrix::from_entries(
            2,
            vec![
                ExtendedRatio::Finite(1.0),
                ExtendedRatio::Infinite,
                ExtendedRatio::Undefined,
                ExtendedRatio::Finite(1.0),
            ],
        );
        assert_eq!(main_mechanism(&b), Err(Error::NoValidColumns));
    }

    #[test]
    fn truthful_matrix_matches_example5_direction() {
        let t = ContributionVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = truthful_matrix(&t, false).unwrap();
        let paper = example5();
        for j in 0..3 {
            let ratio: Vec<f64> = (0..3)
                .filter(|&i| i != j)
                .map(|i| a.get(i, j) / paper.get(i, j))
                .collect();
            assert!(
                (ratio[0] - ratio[1]).abs() < 1e-12,
                "column {j} not proportional"
            );
            assert_eq!(a.get(j, j), 0.0);
        }
    }

    #[test]
    fn truthful_matrix_uniform_and_degenerate() {
        let a = truthful_matrix(&ContributionVector::uniform(4), false).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((a.get(i, j) - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
        let t = ContributionVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(truthful_matrix(&t, false), Err(Error::DegenerateTruth(0)));
    }

    #[test]
    fn run_mechanism_dispatch() {
        let w = InstructorWeights::uniform(3);
        let s = run_mechanism(MechanismKind::PieToOthers, &example1(), &w).unwrap();
        assert_close(s.as_slice(), &[4.0 / 9.0, 5.0 / 18.0, 5.0 / 18.0], 1e-12);
        let s = run_mechanism(MechanismKind::AuxiliaryWeighted, &example5(), &w).unwrap();
        assert_close(s.as_slice(), &[0.2, 0.3, 0.5], 1e-12);
        let id = matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let s = run_mechanism(MechanismKind::PieToAll, &id, &w).unwrap();
        assert_close(s.as_slice(), &[1.0 / 3.0; 3], 1e-15);
    }

    #[test]
    fn zero_contributor_column_is_excluded() {
        let t = ContributionVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        let a = truthful_matrix(&t, false).unwrap();
        let b = auxiliary_matrix(&a, &InstructorWeights::uniform(3)).unwrap();
        // Hand-derived: b_12 = 1, b_13 = b_23 = inf, b_31 = b_32 = 0.
        assert_eq!(b.get(0, 1), ExtendedRatio::Finite(1.0));
        assert_eq!(b.get(0, 2), ExtendedRatio::Infinite);
        assert_eq!(b.get(1, 2), ExtendedRatio::Infinite);
        assert_eq!(b.get(2, 0), ExtendedRatio::Finite(0.0));
        assert_eq!(b.qualifying_columns(), vec![true, true, false]);
        assert_close(
            main_mechanism(&b).unwrap().as_slice(),
            &[0.5, 0.5, 0.0],
            1e-12,
        );
    }

    #[test]
    fn two_zero_contributors_are_undefined_against_each_other() {
        let t = ContributionVector::new(vec![1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0]).unwrap();
        let a = truthful_matrix(&t, false).unwrap();
        let b = auxiliary_matrix(&a, &InstructorWeights::uniform(4)).unwrap();
        assert_eq!(b.get(2, 3), ExtendedRatio::Undefined);
        assert_eq!(b.get(3, 2), ExtendedRatio::Undefined);
        assert_close(main_mechanism(&b).unwrap().as_slice(), t.as_slice(), 1e-12);
    }

    #[test]
    fn kind_round_trips_through_str() {
        for k in MechanismKind::ALL {
            assert_eq!(k.as_str().parse::<MechanismKind>().unwrap(), k);
        }
        assert!("median".parse::<MechanismKind>().is_err());
    }

    #[test]
    fn warns_when_too_few_graded_judges() {
        let w = InstructorWeights::new(vec![4.0, 0.0, 1.0, 3.0]).unwrap();
        assert!(accuracy_preconditions(&example6(), &w).is_empty());
        let w = InstructorWeights::new(vec![4.0, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(
            accuracy_preconditions(&example6(), &w),
            vec![PreconditionWarning::FewInformedJudges { count: 2 }]
        );
    }
}

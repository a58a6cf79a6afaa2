// SPDX-License-Identifier: Apache-2.0

//! Truthfulness of individual reports and the composite final score.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{ContributionVector, EvaluationMatrix, SUM_TOLERANCE};

/// Blend of mechanism share, report grade and consistency bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights {
    pub mechanism_weight: f64,
    pub report_weight: f64,
    pub consistency_weight: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self {
            mechanism_weight: 0.9,
            report_weight: 0.05,
            consistency_weight: 0.05,
        }
    }
}

impl ScoreWeights {
    pub fn new(mechanism_weight: f64, report_weight: f64, consistency_weight: f64) -> Result<Self> {
        let weights = [mechanism_weight, report_weight, consistency_weight];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidScoreWeights(format!(
                "weights must be nonnegative, got {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidScoreWeights(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(Self {
            mechanism_weight,
            report_weight,
            consistency_weight,
        })
    }

    /// Weighted score of one student.
    pub fn combine(&self, share: f64, report_grade: f64, eval_error: f64) -> f64 {
        self.mechanism_weight * share
            + self.report_weight * report_grade
            + self.consistency_weight * consistency_factor(eval_error)
    }
}

/// `1 - min(1, E)`. A NaN error counts as the worst case.
pub fn consistency_factor(eval_error: f64) -> f64 {
    if eval_error.is_nan() {
        0.0
    } else {
        1.0 - eval_error.min(1.0)
    }
}

/// How a report column is compared against the mechanism output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// Entry `i` of the column against share `s_i`; entries with `s_i = 0`
    /// are left out. Zero for a column proportional to `s`.
    #[default]
    PerEntry,
    /// Every entry of column `j` against the single share `s_j`, kept for
    /// comparison with the formula as originally printed.
    PrintedFormula,
}

/// Mean relative error of student `j`'s reported column (self-evaluation
/// included) with respect to the perceived contributions `s`.
pub fn evaluation_error(a: &EvaluationMatrix, s: &ContributionVector, j: usize) -> Result<f64> {
    evaluation_error_with(a, s, j, ErrorMetric::PerEntry)
}

pub fn evaluation_error_with(
    a: &EvaluationMatrix,
    s: &ContributionVector,
    j: usize,
    metric: ErrorMetric,
) -> Result<f64> {
    let n = a.n();
    a.check_index(j)?;
    if s.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: s.len(),
        });
    }
    let total = a.column_sum(j);
    if !(total > 0.0) {
        return Err(Error::ZeroColumn(j));
    }
    let c = (0..n).map(|i| a.get(i, j) / total);

    match metric {
        ErrorMetric::PerEntry => {
            let (sum, count) = c
                .zip(s.as_slice())
                .filter(|(_, &s_i)| s_i > 0.0)
                .fold((0.0, 0usize), |(sum, count), (c_ij, &s_i)| {
                    (sum + (c_ij - s_i).abs() / s_i, count + 1)
                });
            if count == 0 {
                return Err(Error::NoComparableEntries);
            }
            Ok(sum / count as f64)
        }
        ErrorMetric::PrintedFormula => {
            let s_j = s[j];
            if !(s_j > 0.0) {
                return Err(Error::NoComparableEntries);
            }
            Ok(c.map(|c_ij| (c_ij - s_j).abs() / s_j).sum::<f64>() / n as f64)
        }
    }
}

/// Audit line for one student.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudentScore {
    pub mechanism_share: f64,
    pub report_grade: f64,
    pub eval_error: f64,
    pub final_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub weights: ScoreWeights,
    pub students: Vec<StudentScore>,
}

impl ScoreReport {
    pub fn final_scores(&self) -> Vec<f64> {
        self.students.iter().map(|s| s.final_score).collect()
    }

    pub fn total(&self) -> f64 {
        self.students.iter().map(|s| s.final_score).sum()
    }
}

/// Final score per student: `mechanism·s_i + report·w_i + consistency·(1 − min(1, E_i))`.
///
/// `report_grades` must already be scaled into `[0, 1]`.
pub fn compose_final_scores(
    s: &ContributionVector,
    report_grades: &[f64],
    eval_errors: &[f64],
    weights: ScoreWeights,
) -> Result<ScoreReport> {
    let n = s.len();
    for len in [report_grades.len(), eval_errors.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let students = (0..n)
        .map(|i| StudentScore {
            mechanism_share: s[i],
            report_grade: report_grades[i],
            eval_error: eval_errors[i],
            final_score: weights.combine(s[i], report_grades[i], eval_errors[i]),
        })
        .collect();
    Ok(ScoreReport { weights, students })
}

// SPDX-License-Identifier: Apache-2.0

//! Evaluation data shared by every mechanism.
//!
//! An [`EvaluationMatrix`] stores `a[i][j]`, the evaluation of student `i`
//! by student `j`. Column `j` is what student `j` reported, row `i` is what
//! student `i` received.

use std::collections::BTreeSet;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for "sums to one" checks.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for `b_ij * b_ji == 1`.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;

/// Score written into every off-diagonal cell of an imputed column.
pub const IMPUTED_SCORE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationMatrix {
    n: usize,
    /// Row-major `n * n` entries.
    entries: Vec<f64>,
    /// `submitted[j]` is false when column `j` was imputed.
    submitted: Vec<bool>,
}

impl EvaluationMatrix {
    /// Build from rows, checking shape and entry signs. Self-evaluations are allowed.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        validate_matrix(rows, false)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Evaluations reported by student `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Evaluations received by student `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    pub fn is_submitted(&self, j: usize) -> bool {
        self.submitted[j]
    }

    pub fn submitted(&self) -> &[bool] {
        &self.submitted
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn check_zero_diagonal(&self) -> Result<()> {
        match (0..self.n).find(|&i| self.get(i, i) != 0.0) {
            Some(i) => Err(Error::NonzeroDiagonal(i)),
            None => Ok(()),
        }
    }

    /// Copy with every self-evaluation set to zero.
    pub fn without_self_evaluations(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.entries[i * self.n + i] = 0.0;
        }
        out
    }

    /// Copy with column `j` replaced. The column must be nonnegative and finite.
    pub fn with_column(&self, j: usize, column: &[f64]) -> Result<Self> {
        self.check_index(j)?;
        if column.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: column.len(),
            });
        }
        let mut out = self.clone();
        for (i, &v) in column.iter().enumerate() {
            check_entry(v, i, j)?;
            out.entries[i * self.n + j] = v;
        }
        Ok(out)
    }

    /// Copy with column `j` multiplied by `factor > 0`.
    pub fn with_scaled_column(&self, j: usize, factor: f64) -> Result<Self> {
        let column: Vec<f64> = self.column(j).into_iter().map(|v| v * factor).collect();
        self.with_column(j, &column)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.n {
            Ok(())
        } else {
            Err(Error::InvalidIndex { index, n: self.n })
        }
    }
}

fn check_entry(v: f64, i: usize, j: usize) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFiniteEntry(i, j));
    }
    if v < 0.0 {
        return Err(Error::NegativeEntry(i, j));
    }
    Ok(())
}

/// Check raw rows and wrap them in an [`EvaluationMatrix`] with every column
/// marked as submitted.
pub fn validate_matrix(
    rows: Vec<Vec<f64>>,
    require_zero_diagonal: bool,
) -> Result<EvaluationMatrix> {
    let n = rows.len();
    if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            row,
            len: r.len(),
        });
    }
    if n < 2 {
        return Err(Error::TooSmall { n });
    }
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            check_entry(v, i, j)?;
        }
    }
    let matrix = EvaluationMatrix {
        n,
        entries: rows.into_iter().flatten().collect(),
        submitted: vec![true; n],
    };
    if require_zero_diagonal {
        matrix.check_zero_diagonal()?;
    }
    Ok(matrix)
}

/// Divide every column by its sum.
pub fn normalize_columns(a: &EvaluationMatrix) -> Result<EvaluationMatrix> {
    let n = a.n;
    let mut out = a.clone();
    for j in 0..n {
        let total = a.column_sum(j);
        if !(total > 0.0) {
            return Err(Error::ZeroColumn(j));
        }
        for i in 0..n {
            out.entries[i * n + j] = a.get(i, j) / total;
        }
    }
    Ok(out)
}

/// Fill the columns of students who submitted nothing with equal scores for
/// every teammate and zero for themselves, and zero their report grade so the
/// imputed column carries no weight.
pub fn impute_missing(
    a: &EvaluationMatrix,
    missing: &BTreeSet<usize>,
    w: &InstructorWeights,
) -> Result<(EvaluationMatrix, InstructorWeights)> {
    let n = a.n;
    if w.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: w.len(),
        });
    }
    for &j in missing {
        a.check_index(j)?;
    }
    if missing.len() == n {
        return Err(Error::AllMissing);
    }

    let mut out = a.clone();
    let mut weights = w.values.clone();
    for &j in missing {
        for i in 0..n {
            out.entries[i * n + j] = if i == j { 0.0 } else { IMPUTED_SCORE };
        }
        out.submitted[j] = false;
        weights[j] = 0.0;
    }
    Ok((out, InstructorWeights { values: weights }))
}

/// Nonnegative shares summing to one. Used both for true contributions and
/// for mechanism output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ContributionVector {
    values: Vec<f64>,
}

impl ContributionVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidContribution("empty vector".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidContribution(format!(
                "entry {i} is {}",
                values[i]
            )));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidContribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self { values })
    }

    /// Scale nonnegative values so they sum to one.
    pub fn from_unnormalized(values: Vec<f64>) -> Result<Self> {
        let total: f64 = values.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidContribution(format!(
                "entries sum to {total}"
            )));
        }
        Self::new(values.into_iter().map(|v| v / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ContributionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl TryFrom<Vec<f64>> for ContributionVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ContributionVector> for Vec<f64> {
    fn from(c: ContributionVector) -> Self {
        c.values
    }
}

/// Instructor grades for the credibility of each student's written reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructorWeights {
    values: Vec<f64>,
}

impl InstructorWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeight(i));
        }
        Ok(Self { values })
    }

    /// Every report equally trusted.
    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Grades divided by the declared maximum grade, clamped into `[0, 1]`.
    pub fn normalized(&self, max_grade: f64) -> Result<Vec<f64>> {
        if !(max_grade > 0.0) || !max_grade.is_finite() {
            return Err(Error::InvalidScoreWeights(format!(
                "maximum report grade must be positive, got {max_grade}"
            )));
        }
        if let Some(i) = self.values.iter().position(|&v| v > max_grade) {
            return Err(Error::InvalidWeight(i));
        }
        Ok(self.values.iter().map(|v| v / max_grade).collect())
    }
}

impl Index<usize> for InstructorWeights {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("team of {n} is too small, need at least 2 students")]
    TooSmall { n: usize },

    #[error("negative evaluation a[{0}][{1}]")]
    NegativeEntry(usize, usize),

    #[error("non-finite evaluation a[{0}][{1}]")]
    NonFiniteEntry(usize, usize),

    #[error("self-evaluation a[{0}][{0}] must be zero for this mechanism")]
    NonzeroDiagonal(usize),

    #[error("column {0} has no positive entry")]
    ZeroColumn(usize),

    #[error("every student is missing, nothing to evaluate")]
    AllMissing,

    #[error("student index {index} out of range for team of {n}")]
    InvalidIndex { index: usize, n: usize },

    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid contribution vector: {0}")]
    InvalidContribution(String),

    #[error("invalid instructor weight for student {0}")]
    InvalidWeight(usize),

    #[error("invalid score weights: {0}")]
    InvalidScoreWeights(String),

    #[error("auxiliary mechanism needs at least 3 students, got {n}")]
    TeamTooSmall { n: usize },

    #[error("no informed judges: every off-diagonal ratio is undefined")]
    NoInformedJudges,

    #[error("no column of the auxiliary matrix is fully finite")]
    NoValidColumns,

    #[error("student {0} holds the whole contribution, truthful reports are undefined")]
    DegenerateTruth(usize),

    #[error("no student with positive share to compare against")]
    NoComparableEntries,

    #[error("grid resolution {resolution} too coarse for {slots} report slots")]
    ResolutionTooCoarse { resolution: usize, slots: usize },
}

impl Error {
    /// True for failures of the mechanism itself on otherwise well-formed input.
    pub fn is_mechanism_failure(&self) -> bool {
        matches!(
            self,
            Error::TeamTooSmall { .. }
                | Error::NoInformedJudges
                | Error::NoValidColumns
                | Error::DegenerateTruth(_)
                | Error::NoComparableEntries
        )
    }
}

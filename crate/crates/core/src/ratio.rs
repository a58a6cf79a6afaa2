// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Serialize, Serializer};

use crate::evaluation::RECIPROCITY_TOLERANCE;

/// A pairwise contribution ratio `b_ij`.
///
/// `Finite` holds a value `>= 0`; zero appears when `i` is judged to have
/// contributed nothing next to a positive `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedRatio {
    Finite(f64),
    Infinite,
    Undefined,
}

impl ExtendedRatio {
    /// Ratio `numerator / denominator` of two nonnegative sums.
    pub fn from_parts(numerator: f64, denominator: f64) -> Self {
        if denominator > 0.0 {
            ExtendedRatio::Finite(numerator / denominator)
        } else if numerator > 0.0 {
            ExtendedRatio::Infinite
        } else {
            ExtendedRatio::Undefined
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedRatio::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedRatio::Finite(_))
    }
}

impl fmt::Display for ExtendedRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRatio::Finite(v) => write!(f, "{v}"),
            ExtendedRatio::Infinite => f.write_str("inf"),
            ExtendedRatio::Undefined => f.write_str("undefined"),
        }
    }
}

/// Finite values serialize as numbers, the rest as `"inf"` / `"undefined"`.
impl Serialize for ExtendedRatio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedRatio::Finite(v) => serializer.serialize_f64(*v),
            ExtendedRatio::Infinite => serializer.serialize_str("inf"),
            ExtendedRatio::Undefined => serializer.serialize_str("undefined"),
        }
    }
}

/// Square matrix of pairwise ratios, `b[i][j]` is the contribution of `i`
/// relative to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryMatrix {
    n: usize,
    entries: Vec<ExtendedRatio>,
}

impl AuxiliaryMatrix {
    pub(crate) fn from_entries(n: usize, entries: Vec<ExtendedRatio>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    /// Build from finite values, mainly for feeding known matrices to the
    /// mechanism. Diagonal entries are taken as given.
    pub fn from_finite_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| ExtendedRatio::Finite(v)))
            .collect();
        Self::from_entries(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtendedRatio {
        self.entries[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<ExtendedRatio> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// A column qualifies for the final average when none of its entries is
    /// infinite or undefined.
    pub fn column_qualifies(&self, j: usize) -> bool {
        (0..self.n).all(|i| self.get(i, j).is_finite())
    }

    pub fn qualifying_columns(&self) -> Vec<bool> {
        (0..self.n).map(|j| self.column_qualifies(j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<ExtendedRatio>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// First pair `(i, j)` breaking `b_ii == 1` or `b_ij * b_ji == 1`
    /// (relative tolerance), if any.
    pub fn reciprocity_violation(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            if self.get(i, i) != ExtendedRatio::Finite(1.0) {
                return Some((i, i));
            }
            for j in (i + 1)..self.n {
                if let (Some(x), Some(y)) = (self.get(i, j).finite(), self.get(j, i).finite()) {
                    if ((x * y) - 1.0).abs() > RECIPROCITY_TOLERANCE {
                        return Some((i, j));
                    }
                }
            }
        }
        None
    }
}

impl Serialize for AuxiliaryMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

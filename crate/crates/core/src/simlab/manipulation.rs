// SPDX-License-Identifier: Apache-2.0

//! Single-deviator manipulation search.
//!
//! Everyone except the manipulator reports the truth and all reports are
//! graded equally. The manipulator's column is enumerated over a simplex
//! grid; since every mechanism here is invariant to rescaling a column, the
//! grid covers all reports up to its resolution.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{ContributionVector, EvaluationMatrix, InstructorWeights};
use crate::mechanisms::{run_mechanism, truthful_matrix, MechanismKind};
use crate::scoring::{evaluation_error, ScoreWeights};

/// Divisible by 2, 3, 4, 5 and 6.
pub const DEFAULT_RESOLUTION: usize = 60;

/// Improvements smaller than this are treated as ties with the incumbent.
const TIE_EPSILON: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// The manipulator's mechanism share `s_j`.
    MechanismShare,
    /// The manipulator's composite final score, consistency bonus included.
    FinalScore { weights: ScoreWeights },
}

impl Objective {
    fn scores_self_evaluation(self) -> bool {
        matches!(self, Objective::FinalScore { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManipulationResult {
    pub manipulator: usize,
    pub mechanism: MechanismKind,
    pub objective: Objective,
    /// Objective value of the truthful report.
    pub honest_share: f64,
    /// Best objective value found.
    pub best_share: f64,
    /// Maximizing report, scaled to sum to one.
    pub best_report: Vec<f64>,
    pub gain: f64,
    pub grid_resolution: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct ManipulationSearch {
    truth: ContributionVector,
    manipulator: usize,
    resolution: usize,
    objective: Objective,
    mechanism: MechanismKind,
    honest: EvaluationMatrix,
}

impl ManipulationSearch {
    /// Search against the auxiliary mechanism for the manipulator's share.
    pub fn new(truth: ContributionVector, manipulator: usize) -> Result<Self> {
        let n = truth.len();
        if manipulator >= n {
            return Err(Error::InvalidIndex {
                index: manipulator,
                n,
            });
        }
        let honest = truthful_matrix(&truth, true)?;
        Ok(Self {
            truth,
            manipulator,
            resolution: DEFAULT_RESOLUTION,
            objective: Objective::MechanismShare,
            mechanism: MechanismKind::AuxiliaryWeighted,
            honest,
        })
    }

    pub fn resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn mechanism(mut self, mechanism: MechanismKind) -> Self {
        self.mechanism = mechanism;
        self
    }

    fn n(&self) -> usize {
        self.truth.len()
    }

    /// Whether the manipulator's own entry matters and is therefore searched.
    fn searches_self_entry(&self) -> bool {
        self.mechanism.uses_self_evaluation() || self.objective.scores_self_evaluation()
    }

    /// The manipulator's truthful column, self entry zeroed when it is not searched.
    pub fn honest_report(&self) -> Vec<f64> {
        let mut column = self.honest.column(self.manipulator);
        if !self.searches_self_entry() {
            column[self.manipulator] = 0.0;
        }
        let total: f64 = column.iter().sum();
        column.into_iter().map(|v| v / total).collect()
    }

    /// Objective value when the manipulator reports `report` (length n,
    /// entry `manipulator` is the self-evaluation).
    pub fn evaluate(&self, report: &[f64]) -> Result<f64> {
        let j = self.manipulator;
        let full = self.honest.with_column(j, report)?;
        let mechanism_input = if self.mechanism.uses_self_evaluation() {
            full.clone()
        } else {
            full.without_self_evaluations()
        };
        let s = run_mechanism(
            self.mechanism,
            &mechanism_input,
            &InstructorWeights::uniform(self.n()),
        )?;
        match self.objective {
            Objective::MechanismShare => Ok(s[j]),
            Objective::FinalScore { weights } => {
                let e = evaluation_error(&full, &s, j)?;
                Ok(weights.combine(s[j], 1.0, e))
            }
        }
    }

    /// All grid reports, in enumeration order.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        let j = self.manipulator;
        let slots = if self.searches_self_entry() { n } else { n - 1 };
        simplex_grid(slots, self.resolution)
            .into_iter()
            .map(|point| {
                if self.searches_self_entry() {
                    point
                } else {
                    let mut report = point;
                    report.insert(j, 0.0);
                    report
                }
            })
            .collect()
    }

    pub fn run(&self) -> Result<ManipulationResult> {
        let n = self.n();
        if self.resolution < n - 1 {
            return Err(Error::ResolutionTooCoarse {
                resolution: self.resolution,
                slots: n - 1,
            });
        }
        let honest_report = self.honest_report();
        let honest_value = self.evaluate(&honest_report)?;

        let grid = self.grid();
        // Infeasible reports (e.g. an all-zero column) are skipped.
        let values: Vec<Option<f64>> = grid.par_iter().map(|r| self.evaluate(r).ok()).collect();

        let mut best_value = honest_value;
        let mut best_report = honest_report;
        for (report, value) in grid.iter().zip(values) {
            if let Some(v) = value {
                if v > best_value + TIE_EPSILON {
                    best_value = v;
                    best_report = report.clone();
                }
            }
        }

        Ok(ManipulationResult {
            manipulator: self.manipulator,
            mechanism: self.mechanism,
            objective: self.objective,
            honest_share: honest_value,
            best_share: best_value,
            best_report,
            gain: best_value - honest_value,
            grid_resolution: self.resolution,
            candidates: grid.len() + 1,
        })
    }
}

/// Exhaustive search of student `j`'s report against the auxiliary mechanism.
pub fn manipulation_search(
    t: &ContributionVector,
    j: usize,
    resolution: usize,
    objective: Objective,
) -> Result<ManipulationResult> {
    ManipulationSearch::new(t.clone(), j)?
        .resolution(resolution)
        .objective(objective)
        .run()
}

/// Every vector of `slots` multiples of `1 / resolution` summing to one,
/// in lexicographic order of the integer numerators.
pub fn simplex_grid(slots: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn fill(
        prefix: &mut Vec<usize>,
        slots: usize,
        remaining: usize,
        resolution: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if prefix.len() + 1 == slots {
            prefix.push(remaining);
            out.push(
                prefix
                    .iter()
                    .map(|&k| k as f64 / resolution as f64)
                    .collect(),
            );
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            fill(prefix, slots, remaining - k, resolution, out);
            prefix.pop();
        }
    }

    let mut out = Vec::new();
    if slots == 0 || resolution == 0 {
        return out;
    }
    fill(
        &mut Vec::with_capacity(slots),
        slots,
        resolution,
        resolution,
        &mut out,
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncentiveRow {
    pub manipulator: usize,
    pub honest_final: f64,
    pub best_final: f64,
    pub gain: f64,
    pub best_report: Vec<f64>,
}

/// Best final-score deviation of each student in turn. Produces evidence
/// about whether the consistency bonus deters misreporting; asserts nothing.
pub fn incentive_experiment(
    t: &ContributionVector,
    weights: ScoreWeights,
    resolution: usize,
) -> Result<Vec<IncentiveRow>> {
    (0..t.len())
        .map(|j| {
            let r = manipulation_search(t, j, resolution, Objective::FinalScore { weights })?;
            Ok(IncentiveRow {
                manipulator: j,
                honest_final: r.honest_share,
                best_final: r.best_share,
                gain: r.gain,
                best_report: r.best_report,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub weights: ScoreWeights,
    pub manipulator: usize,
    pub honest_final: f64,
    pub best_final: f64,
    pub gain: f64,
}

/// Rerun [`incentive_experiment`] for each consistency weight `c`, keeping
/// the base report weight and giving the rest to the mechanism share.
pub fn incentive_sweep(
    t: &ContributionVector,
    base: ScoreWeights,
    consistency_weights: &[f64],
    resolution: usize,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &c in consistency_weights {
        let weights = ScoreWeights::new(1.0 - base.report_weight - c, base.report_weight, c)?;
        for row in incentive_experiment(t, weights, resolution)? {
            rows.push(SweepRow {
                weights,
                manipulator: row.manipulator,
                honest_final: row.honest_final,
                best_final: row.best_final,
                gain: row.gain,
            });
        }
    }
    Ok(rows)
}

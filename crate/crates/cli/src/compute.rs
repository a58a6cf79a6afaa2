// SPDX-License-Identifier: Apache-2.0

//! `compute`: evaluations and grades in, audited score report out.

use std::path::Path;

use peer_eval::{
    accuracy_preconditions, auxiliary_matrix, compose_final_scores, evaluation_error,
    impute_missing, main_mechanism, normalize_columns, pie_to_all, pie_to_others, AuxiliaryMatrix,
    EvaluationMatrix, InstructorWeights, MechanismKind, ScoreWeights,
};
use serde::Serialize;

use crate::error::Result;
use crate::input::{load_evaluations, load_instructor_grades, load_roster, Roster};
use crate::report::{format_number, to_csv, to_json, to_table, OutputFormat};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mechanism: MechanismKind,
    pub score_weights: ScoreWeights,
    /// Grade that maps to a full report score. `None` takes the highest grade given.
    pub max_report_grade: Option<f64>,
    pub grid_resolution: usize,
    pub output_format: OutputFormat,
    /// Students without a grade get 0 instead of failing the run.
    pub missing_grades_zero: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mechanism: MechanismKind::AuxiliaryWeighted,
            score_weights: ScoreWeights::default(),
            max_report_grade: None,
            grid_resolution: peer_eval::simlab::DEFAULT_RESOLUTION,
            output_format: OutputFormat::Json,
            missing_grades_zero: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudentLine {
    pub id: String,
    pub name: String,
    pub submitted: bool,
    pub mechanism_share: f64,
    pub raw_report_grade: f64,
    pub report_grade: f64,
    /// `None` when the student's column has no positive entry.
    pub eval_error: Option<f64>,
    pub final_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComputeReport {
    pub mechanism: MechanismKind,
    pub score_weights: ScoreWeights,
    pub max_report_grade: f64,
    pub students: Vec<StudentLine>,
    /// Evaluations after imputation, self-evaluations included.
    pub evaluations: Vec<Vec<f64>>,
    pub normalized_evaluations: Option<Vec<Vec<f64>>>,
    pub auxiliary_matrix: Option<AuxiliaryMatrix>,
    pub qualifying_columns: Option<Vec<bool>>,
    pub warnings: Vec<String>,
}

impl ComputeReport {
    pub fn shares(&self) -> Vec<f64> {
        self.students.iter().map(|s| s.mechanism_share).collect()
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        let header = [
            "id",
            "name",
            "mechanism_share",
            "report_grade",
            "eval_error",
            "final_score",
        ];
        let rows: Vec<Vec<String>> = self
            .students
            .iter()
            .map(|s| {
                vec![
                    s.id.clone(),
                    s.name.clone(),
                    format_number(s.mechanism_share),
                    format_number(s.report_grade),
                    s.eval_error.map_or_else(String::new, format_number),
                    format_number(s.final_score),
                ]
            })
            .collect();
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => to_csv(&header, &rows),
            OutputFormat::Text => {
                let mut out = format!("mechanism: {}\n\n", self.mechanism);
                out.push_str(&to_table(&header, &rows));
                for w in &self.warnings {
                    out.push_str(&format!("warning: {w}\n"));
                }
                Ok(out)
            }
        }
    }
}

/// Impute, run the mechanism, measure report consistency and compose final
/// scores. `evaluations` must be in roster order and may contain
/// self-evaluations; `missing` lists students who submitted nothing.
pub fn compute_scores(
    config: &RunConfig,
    roster: &Roster,
    evaluations: &EvaluationMatrix,
    missing: &std::collections::BTreeSet<usize>,
    grades: &InstructorWeights,
) -> Result<ComputeReport> {
    let (a, w) = impute_missing(evaluations, missing, grades)?;
    let mechanism_input = if config.mechanism.uses_self_evaluation() {
        a.clone()
    } else {
        a.without_self_evaluations()
    };

    let (shares, b) = match config.mechanism {
        MechanismKind::PieToAll => (pie_to_all(&mechanism_input)?, None),
        MechanismKind::PieToOthers => (pie_to_others(&mechanism_input)?, None),
        MechanismKind::AuxiliaryWeighted => {
            let b = auxiliary_matrix(&mechanism_input, &w)?;
            (main_mechanism(&b)?, Some(b))
        }
    };

    let n = a.n();
    let errors: Vec<Option<f64>> = (0..n)
        .map(|j| evaluation_error(&a, &shares, j).ok())
        .collect();
    let max_grade = config.max_report_grade.unwrap_or_else(|| {
        let top = grades.as_slice().iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            top
        } else {
            1.0
        }
    });
    let report_grades = w.normalized(max_grade)?;
    let composed = compose_final_scores(
        &shares,
        &report_grades,
        &errors
            .iter()
            .map(|e| e.unwrap_or(f64::INFINITY))
            .collect::<Vec<_>>(),
        config.score_weights,
    )?;

    let mut warnings: Vec<String> = missing
        .iter()
        .map(|&j| {
            format!(
                "`{}` submitted no evaluations; equal scores imputed",
                roster.id(j)
            )
        })
        .collect();
    if config.mechanism == MechanismKind::AuxiliaryWeighted {
        warnings.extend(
            accuracy_preconditions(&a, &w)
                .iter()
                .map(ToString::to_string),
        );
    }

    let students = roster
        .students()
        .iter()
        .zip(&composed.students)
        .enumerate()
        .map(|(i, (student, score))| StudentLine {
            id: student.id.clone(),
            name: student.name.clone(),
            submitted: a.is_submitted(i),
            mechanism_share: score.mechanism_share,
            raw_report_grade: grades[i],
            report_grade: score.report_grade,
            eval_error: errors[i],
            final_score: score.final_score,
        })
        .collect();

    Ok(ComputeReport {
        mechanism: config.mechanism,
        score_weights: config.score_weights,
        max_report_grade: max_grade,
        students,
        evaluations: a.rows(),
        normalized_evaluations: normalize_columns(&a).ok().map(|m| m.rows()),
        qualifying_columns: b.as_ref().map(AuxiliaryMatrix::qualifying_columns),
        auxiliary_matrix: b,
        warnings,
    })
}

/// Load the three input files and compute the report.
pub fn cmd_compute(
    config: &RunConfig,
    evaluations: &Path,
    grades: &Path,
    roster: &Path,
) -> Result<ComputeReport> {
    let roster = load_roster(roster)?;
    let (a, missing) = load_evaluations(evaluations, &roster)?;
    let w = load_instructor_grades(grades, &roster, config.missing_grades_zero)?;
    compute_scores(config, &roster, &a, &missing, &w)
}

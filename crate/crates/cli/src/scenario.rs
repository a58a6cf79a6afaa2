// SPDX-License-Identifier: Apache-2.0

//! `simulate`: TOML scenario in, experiment report out.
//!
//! ```toml
//! seed = 7
//! resolution = 60
//!
//! [accuracy]
//! trials = 1000
//! min_team = 3
//! max_team = 8
//!
//! [[manipulation]]
//! truth = ["1/2", "1/4", "1/4"]
//! manipulator = 2
//! deviation = ["1/2", "1/2", 0]
//!
//! [incentive]
//! truth = ["1/2", "1/4", "1/4"]
//! consistency_sweep = [0.0, 0.05, 0.1, 0.2]
//! ```
//!
//! Student indices are 0-based. Shares may be numbers or `"p/q"` strings.

use std::path::Path;

use peer_eval::simlab::{
    incentive_sweep, run_accuracy_trials, run_zero_contributor_trials, AccuracySummary,
    ManipulationResult, ManipulationSearch, Objective, SweepRow, DEFAULT_RESOLUTION,
};
use peer_eval::{ContributionVector, MechanismKind, ScoreWeights};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::{format_number, to_csv, to_json, to_table, OutputFormat};

/// A share written as a number or as a `"p/q"` fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Share(pub f64);

impl<'de> Deserialize<'de> for Share {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let value = match Raw::deserialize(d)? {
            Raw::Int(i) => i as f64,
            Raw::Float(f) => f,
            Raw::Text(s) => parse_fraction(&s).map_err(serde::de::Error::custom)?,
        };
        Ok(Share(value))
    }
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("`{s}` is not a number or p/q fraction");
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(format!("`{s}` divides by zero"));
            }
            p / q
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn shares(values: &[Share]) -> Vec<f64> {
    values.iter().map(|s| s.0).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    #[default]
    MechanismShare,
    FinalScore,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccuracySpec {
    pub trials: usize,
    #[serde(default = "default_min_team")]
    pub min_team: usize,
    #[serde(default = "default_max_team")]
    pub max_team: usize,
    #[serde(default)]
    pub zero_contributor: bool,
}

fn default_min_team() -> usize {
    3
}

fn default_max_team() -> usize {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulationSpec {
    pub truth: Vec<Share>,
    pub manipulator: usize,
    #[serde(default)]
    pub objective: ObjectiveKind,
    #[serde(default)]
    pub mechanism: Option<MechanismKind>,
    #[serde(default)]
    pub resolution: Option<usize>,
    /// A specific report to score besides the search.
    #[serde(default)]
    pub deviation: Option<Vec<Share>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncentiveSpec {
    pub truth: Vec<Share>,
    #[serde(default = "default_sweep")]
    pub consistency_sweep: Vec<f64>,
    #[serde(default)]
    pub resolution: Option<usize>,
}

fn default_sweep() -> Vec<f64> {
    vec![0.0, 0.05, 0.1, 0.2]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub accuracy: Option<AccuracySpec>,
    #[serde(default)]
    pub manipulation: Vec<ManipulationSpec>,
    #[serde(default)]
    pub incentive: Option<IncentiveSpec>,
}

impl Scenario {
    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start.min(text.len())].matches('\n').count() as u64 + 1)
                .unwrap_or(0);
            CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManipulationEntry {
    #[serde(flatten)]
    pub result: ManipulationResult,
    pub deviation: Option<Vec<f64>>,
    pub deviation_value: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IncentiveReport {
    pub truth: Vec<f64>,
    pub base_weights: ScoreWeights,
    pub resolution: usize,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub accuracy: Option<AccuracySummary>,
    pub manipulation: Vec<ManipulationEntry>,
    pub incentive: Option<IncentiveReport>,
}

fn objective_for(kind: ObjectiveKind, weights: ScoreWeights) -> Objective {
    match kind {
        ObjectiveKind::MechanismShare => Objective::MechanismShare,
        ObjectiveKind::FinalScore => Objective::FinalScore { weights },
    }
}

pub fn run_scenario(
    scenario: &Scenario,
    weights: ScoreWeights,
    default_resolution: usize,
) -> Result<SimulationReport> {
    let resolution = scenario.resolution.unwrap_or(default_resolution);

    let accuracy = match &scenario.accuracy {
        Some(spec) => {
            if spec.min_team < 3 || spec.max_team < spec.min_team {
                return Err(CliError::Invalid(format!(
                    "accuracy team sizes {}..={} invalid, need 3 <= min_team <= max_team",
                    spec.min_team, spec.max_team
                )));
            }
            let sizes = spec.min_team..=spec.max_team;
            Some(if spec.zero_contributor {
                run_zero_contributor_trials(spec.trials, sizes, scenario.seed)
            } else {
                run_accuracy_trials(spec.trials, sizes, scenario.seed)
            })
        }
        None => None,
    };

    let manipulation = scenario
        .manipulation
        .iter()
        .map(|spec| {
            let truth = ContributionVector::new(shares(&spec.truth))?;
            let search = ManipulationSearch::new(truth, spec.manipulator)?
                .resolution(spec.resolution.unwrap_or(resolution))
                .objective(objective_for(spec.objective, weights))
                .mechanism(spec.mechanism.unwrap_or(MechanismKind::AuxiliaryWeighted));
            let result = search.run()?;
            let deviation = spec.deviation.as_deref().map(shares);
            let deviation_value = deviation
                .as_deref()
                .map(|d| search.evaluate(d))
                .transpose()?;
            Ok(ManipulationEntry {
                result,
                deviation,
                deviation_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let incentive = match &scenario.incentive {
        Some(spec) => {
            let truth = ContributionVector::new(shares(&spec.truth))?;
            let res = spec.resolution.unwrap_or(resolution);
            let rows = incentive_sweep(&truth, weights, &spec.consistency_sweep, res)?;
            Some(IncentiveReport {
                truth: truth.as_slice().to_vec(),
                base_weights: weights,
                resolution: res,
                rows,
            })
        }
        None => None,
    };

    Ok(SimulationReport {
        seed: scenario.seed,
        accuracy,
        manipulation,
        incentive,
    })
}

pub fn cmd_simulate(scenario_path: &Path, weights: ScoreWeights) -> Result<SimulationReport> {
    run_scenario(&Scenario::load(scenario_path)?, weights, DEFAULT_RESOLUTION)
}

const TABLE_HEADER: [&str; 8] = [
    "kind",
    "mechanism_weight",
    "report_weight",
    "consistency_weight",
    "manipulator",
    "honest",
    "best",
    "gain",
];

impl SimulationReport {
    /// Manipulation and sweep results as one flat table.
    fn table_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for m in &self.manipulation {
            let (kind, w) = match m.result.objective {
                Objective::MechanismShare => ("mechanism_share", None),
                Objective::FinalScore { weights } => ("final_score", Some(weights)),
            };
            let weight_cells = match w {
                Some(w) => {
                    [w.mechanism_weight, w.report_weight, w.consistency_weight].map(format_number)
                }
                None => ["1", "0", "0"].map(String::from),
            };
            let mut row = vec![kind.to_string()];
            row.extend(weight_cells);
            row.extend([
                m.result.manipulator.to_string(),
                format_number(m.result.honest_share),
                format_number(m.result.best_share),
                format_number(m.result.gain),
            ]);
            rows.push(row);
        }
        if let Some(inc) = &self.incentive {
            for r in &inc.rows {
                rows.push(vec![
                    "incentive_sweep".to_string(),
                    format_number(r.weights.mechanism_weight),
                    format_number(r.weights.report_weight),
                    format_number(r.weights.consistency_weight),
                    r.manipulator.to_string(),
                    format_number(r.honest_final),
                    format_number(r.best_final),
                    format_number(r.gain),
                ]);
            }
        }
        rows
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => to_csv(&TABLE_HEADER, &self.table_rows()),
            OutputFormat::Text => {
                let mut out = String::new();
                if let Some(acc) = &self.accuracy {
                    out.push_str(&format!(
                        "accuracy: {} trials, team sizes {}..={}, {} failures, max deviation {}\n\n",
                        acc.trials,
                        acc.team_sizes.0,
                        acc.team_sizes.1,
                        acc.failures,
                        format_number(acc.max_deviation)
                    ));
                }
                let rows = self.table_rows();
                if !rows.is_empty() {
                    out.push_str(&to_table(&TABLE_HEADER, &rows));
                }
                Ok(out)
            }
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! File-based front end for the peer evaluation mechanisms: CSV loaders,
//! the `compute` and `simulate` pipelines and report rendering.

pub mod compute;
pub mod error;
pub mod input;
pub mod report;
pub mod scenario;

pub use compute::{cmd_compute, compute_scores, ComputeReport, RunConfig};
pub use error::{CliError, Result};
pub use input::{
    load_evaluations, load_instructor_grades, load_roster, write_evaluations, Roster, Student,
};
pub use report::OutputFormat;
pub use scenario::{cmd_simulate, run_scenario, Scenario, SimulationReport};

/// Parse `m,r,c` into score weights.
pub fn parse_score_weights(s: &str) -> std::result::Result<peer_eval::ScoreWeights, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        })
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [m, r, c] => peer_eval::ScoreWeights::new(m, r, c).map_err(|e| e.to_string()),
        _ => Err(format!(
            "expected three comma-separated weights, got {}",
            parts.len()
        )),
    }
}

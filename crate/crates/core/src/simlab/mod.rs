// SPDX-License-Identifier: Apache-2.0

//! Simulation lab: randomized checks that truthful reports are recovered,
//! and exhaustive search for profitable misreports.

mod accuracy;
mod manipulation;

pub use accuracy::{
    accuracy_trial, check_accuracy, random_truth, run_accuracy_trials, run_zero_contributor_trials,
    zero_contributor_trial, AccuracySummary, TrialOutcome, ACCURACY_TOLERANCE, MIN_RANDOM_SHARE,
};
pub use manipulation::{
    incentive_experiment, incentive_sweep, manipulation_search, simplex_grid, IncentiveRow,
    ManipulationResult, ManipulationSearch, Objective, SweepRow, DEFAULT_RESOLUTION,
};

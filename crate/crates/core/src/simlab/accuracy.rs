// SPDX-License-Identifier: Apache-2.0

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::evaluation::{ContributionVector, InstructorWeights};
use crate::mechanisms::{run_mechanism, truthful_matrix, MechanismKind};

/// Largest tolerated `|s_i - t_i|` for truthful input.
pub const ACCURACY_TOLERANCE: f64 = 1e-9;

/// Random truth vectors with a share below this are redrawn.
pub const MIN_RANDOM_SHARE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub n: usize,
    pub seed: Option<u64>,
    pub truth: Vec<f64>,
    pub weights: Vec<f64>,
    pub column_scales: Vec<f64>,
    pub output: Option<Vec<f64>>,
    pub max_deviation: f64,
    pub passed: bool,
    pub error: Option<String>,
}

/// Uniform draw from the simplex (Dirichlet(1)), redrawn until every share
/// is at least [`MIN_RANDOM_SHARE`].
pub fn random_truth<R: Rng>(n: usize, rng: &mut R) -> ContributionVector {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let shares: Vec<f64> = raw.into_iter().map(|v| v / total).collect();
        if shares.iter().all(|&v| v >= MIN_RANDOM_SHARE) {
            if let Ok(t) = ContributionVector::new(shares) {
                return t;
            }
        }
    }
}

fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    // (0, 1]
    (0..n).map(|_| 1.0 - rng.random::<f64>()).collect()
}

fn random_scales<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| 10f64.powf(rng.random_range(-2.0..2.0)))
        .collect()
}

/// Run the auxiliary mechanism on truthful reports for `truth`, each column
/// multiplied by `column_scales[j]`, and compare the output with `truth`.
pub fn check_accuracy(
    truth: &ContributionVector,
    weights: &[f64],
    column_scales: &[f64],
) -> TrialOutcome {
    let n = truth.len();
    let run = || -> Result<ContributionVector> {
        let w = InstructorWeights::new(weights.to_vec())?;
        let mut a = truthful_matrix(truth, false)?;
        for (j, &c) in column_scales.iter().enumerate() {
            a = a.with_scaled_column(j, c)?;
        }
        run_mechanism(MechanismKind::AuxiliaryWeighted, &a, &w)
    };
    let (output, max_deviation, error) = match run() {
        Ok(s) => {
            let dev = s.max_abs_diff(truth.as_slice());
            (Some(s.as_slice().to_vec()), dev, None)
        }
        Err(e) => (None, f64::INFINITY, Some(e.to_string())),
    };
    TrialOutcome {
        n,
        seed: None,
        truth: truth.as_slice().to_vec(),
        weights: weights.to_vec(),
        column_scales: column_scales.to_vec(),
        output,
        passed: max_deviation < ACCURACY_TOLERANCE,
        max_deviation,
        error,
    }
}

/// Random interior truth, random weights in `(0, 1]`, random column scales.
pub fn accuracy_trial(n: usize, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = random_truth(n, &mut rng);
    let weights = random_weights(n, &mut rng);
    let scales = random_scales(n, &mut rng);
    TrialOutcome {
        seed: Some(seed),
        ..check_accuracy(&truth, &weights, &scales)
    }
}

/// Like [`accuracy_trial`] but one random student contributed nothing.
pub fn zero_contributor_trial(n: usize, seed: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idle = rng.random_range(0..n);
    let mut shares = random_truth(n - 1, &mut rng).as_slice().to_vec();
    shares.insert(idle, 0.0);
    let truth = ContributionVector::new(shares).expect("inserting a zero keeps the sum");
    let weights = random_weights(n, &mut rng);
    let scales = random_scales(n, &mut rng);
    TrialOutcome {
        seed: Some(seed),
        ..check_accuracy(&truth, &weights, &scales)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracySummary {
    pub trials: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub team_sizes: (usize, usize),
    pub base_seed: u64,
    pub failed: Vec<TrialOutcome>,
}

fn summarize<F>(
    count: usize,
    sizes: RangeInclusive<usize>,
    base_seed: u64,
    trial: F,
) -> AccuracySummary
where
    F: Fn(usize, u64) -> TrialOutcome + Sync,
{
    let (lo, hi) = (*sizes.start(), *sizes.end());
    let span = hi - lo + 1;
    let outcomes: Vec<TrialOutcome> = (0..count)
        .into_par_iter()
        .map(|i| trial(lo + i % span, base_seed.wrapping_add(i as u64)))
        .collect();
    AccuracySummary {
        trials: count,
        failures: outcomes.iter().filter(|o| !o.passed).count(),
        max_deviation: outcomes.iter().map(|o| o.max_deviation).fold(0.0, f64::max),
        team_sizes: (lo, hi),
        base_seed,
        failed: outcomes.into_iter().filter(|o| !o.passed).collect(),
    }
}

/// `count` accuracy trials cycling through team sizes in `sizes` (at least 3).
/// Trial `i` uses seed `base_seed + i`.
pub fn run_accuracy_trials(
    count: usize,
    sizes: RangeInclusive<usize>,
    base_seed: u64,
) -> AccuracySummary {
    summarize(count, sizes, base_seed, accuracy_trial)
}

pub fn run_zero_contributor_trials(
    count: usize,
    sizes: RangeInclusive<usize>,
    base_seed: u64,
) -> AccuracySummary {
    summarize(count, sizes, base_seed, zero_contributor_trial)
}

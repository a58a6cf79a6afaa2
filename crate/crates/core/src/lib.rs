// SPDX-License-Identifier: Apache-2.0

//! Peer evaluation for team projects.
//!
//! Students report how much each teammate contributed; a mechanism turns
//! the reports into contribution shares. Besides the classic pie-splitting
//! mechanisms this crate implements an auxiliary-matrix mechanism that
//! ignores self-evaluations, weights each judge by the instructor's grade
//! for their written reports, and recovers the true shares whenever the
//! reports are truthful.

// `!(x > 0.0)` is used on purpose so NaN takes the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod mechanisms;
pub mod ratio;
pub mod scoring;
pub mod simlab;

pub use error::{Error, Result};
pub use evaluation::{
    impute_missing, normalize_columns, validate_matrix, ContributionVector, EvaluationMatrix,
    InstructorWeights,
};
pub use mechanisms::{
    accuracy_preconditions, auxiliary_matrix, main_mechanism, pie_to_all, pie_to_others,
    run_mechanism, truthful_matrix, MechanismKind, PreconditionWarning,
};
pub use ratio::{AuxiliaryMatrix, ExtendedRatio};
pub use scoring::{
    compose_final_scores, evaluation_error, evaluation_error_with, ErrorMetric, ScoreReport,
    ScoreWeights, StudentScore,
};

// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}:{line}: unknown student `{id}`", path.display())]
    UnknownStudent {
        path: PathBuf,
        line: u64,
        id: String,
    },

    #[error("duplicate evaluation of `{evaluatee}` by `{evaluator}`")]
    DuplicateCell {
        evaluator: String,
        evaluatee: String,
    },

    #[error("negative score for `{evaluatee}` from `{evaluator}`")]
    NegativeScore {
        evaluator: String,
        evaluatee: String,
    },

    #[error("`{evaluator}` submitted evaluations but none for `{evaluatee}`")]
    IncompleteSubmission {
        evaluator: String,
        evaluatee: String,
    },

    #[error("no report grade for `{id}` (pass --missing-grades-zero to default to 0)")]
    MissingGrade { id: String },

    #[error("invalid roster: {0}")]
    Roster(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] peer_eval::Error),
}

impl CliError {
    /// 1 for bad input, 2 when the mechanism cannot produce shares, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Core(e) if e.is_mechanism_failure() => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

use std::fmt;

use thiserror::Error;

use crate::model::{PairKey, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown slice {0}")]
    UnknownSlice(u32),

    #[error("unknown (slice, layer) pair {0}")]
    UnknownPair(PairKey),

    #[error("level {level} is not defined for pair {pair}")]
    UnknownLevel { pair: PairKey, level: u32 },

    #[error("control value {control} is not on the control grid of pair {pair}")]
    ControlNotOnGrid { pair: PairKey, control: String },

    #[error("invalid assignment: {}", join_issues(.0))]
    InvalidAssignment(Vec<AssignmentIssue>),

    #[error("invalid scenario:\n{0}")]
    InvalidScenario(ValidationReport),

    #[error("simplex numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("unknown isolation label {0:?}")]
    UnknownLabel(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("plan has no assignment (status {0})")]
    EmptyPlan(String),

    #[error("invalid slice-type presets: {0}")]
    InvalidPresets(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One offending entry of an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentIssue {
    pub pair: PairKey,
    pub reason: String,
}

impl fmt::Display for AssignmentIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pair, self.reason)
    }
}

fn join_issues(issues: &[AssignmentIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

use std::fmt;

use thiserror::Error;

use crate::report::ValidationReport;

/// A syntax error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("unknown action `{0}`")]
    UnknownAction(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("state width {found} does not match expected width {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("{what}: {count} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        count: u64,
        cap: u64,
    },

    #[error("probability {0} lies outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("outcome `{outcome}` has non-dyadic probability {probability}")]
    NonDyadic {
        outcome: String,
        probability: String,
    },

    #[error("invalid plan: {0}")]
    InvalidPlan(ValidationReport),

    #[error("invalid domain: {0}")]
    InvalidDomain(ValidationReport),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(ValidationReport),

    #[error("{0}")]
    Unsupported(String),

    #[error("machine left its {space}-cell tape at step {step}")]
    SpaceBoundViolation { space: usize, step: u64 },

    #[error("singular linear system")]
    Singular,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

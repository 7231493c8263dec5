use std::fmt;

use crate::rational::{format_exact, Rational};
use crate::state::State;

/// One defect found by a structural or stochastic check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub state: Option<State>,
    pub action: Option<String>,
    pub defect: String,
    pub sum: Option<Rational>,
}

impl Violation {
    pub fn structural(defect: impl Into<String>) -> Self {
        Violation {
            state: None,
            action: None,
            defect: defect.into(),
            sum: None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(state) = &self.state {
            write!(f, "state {state}: ")?;
        }
        if let Some(action) = &self.action {
            write!(f, "action {action}: ")?;
        }
        f.write_str(&self.defect)?;
        if let Some(sum) = &self.sum {
            write!(f, " (sum {})", format_exact(sum))?;
        }
        Ok(())
    }
}

/// Outcome of a validation pass. `ok` holds exactly when `violations` is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Set when the state space was too large to enumerate and only a fixed
    /// pseudo-random sample of states was checked.
    pub sampled: bool,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }

    pub fn defect(&mut self, defect: impl Into<String>) {
        self.violations.push(Violation::structural(defect));
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
        self.sampled |= other.sampled;
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            f.write_str("ok")?;
        } else {
            write!(f, "{} violation(s)", self.violations.len())?;
            for v in &self.violations {
                write!(f, "\n  - {v}")?;
            }
        }
        if self.sampled {
            f.write_str(" [sampled only]")?;
        }
        Ok(())
    }
}

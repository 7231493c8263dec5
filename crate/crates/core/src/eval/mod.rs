//! Exact plan evaluation.
//!
//! Every evaluator treats goal states as absorbing: probability mass that
//! enters the goal is banked and never moves again. If the initial state is a
//! goal state every plan has value 1.

mod looping;
mod partial;
mod propagate;

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

pub use looping::{eval_looping, SOLVER_CAP};
pub use partial::{eval_partial, Interpretation};
pub use propagate::{eval_acyclic, eval_looping_truncated, eval_total_order};

use crate::domain::{ActionId, PlanningDomain};
use crate::error::{Error, Result};
use crate::plans::{BoundController, Plan, TotalOrderPlan};
use crate::rational::{format_decimal, format_exact, Rational};
use crate::state::State;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Distinct `(domain state, plan step)` pairs that carried probability.
    pub reachable_states: usize,
    /// Pivots used by the linear solver (looping plans only).
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationResult {
    pub value: Rational,
    /// The achieving linearization for optimistic and pessimistic
    /// partial-order evaluation.
    pub witness: Option<TotalOrderPlan>,
    pub diagnostics: Diagnostics,
}

impl EvaluationResult {
    fn plain(value: Rational, diagnostics: Diagnostics) -> Self {
        EvaluationResult {
            value,
            witness: None,
            diagnostics,
        }
    }
}

impl fmt::Display for EvaluationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", format_exact(&self.value), format_decimal(&self.value, 6))
    }
}

/// Expected number of executions of one action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpectedCount {
    Finite(Rational),
    /// Some reachable closed non-goal class executes the action forever.
    Divergent,
}

impl fmt::Display for ExpectedCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectedCount::Finite(v) => write!(f, "{} ({})", format_exact(v), format_decimal(v, 6)),
            ExpectedCount::Divergent => f.write_str("divergent"),
        }
    }
}

/// `value >= threshold`, compared exactly.
pub fn meets_threshold(value: &Rational, threshold: &Rational) -> bool {
    value >= threshold
}

type Distribution = Rc<[(State, Rational)]>;

/// Memoized successor distributions for one evaluation call.
pub(crate) struct Successors<'a> {
    domain: &'a PlanningDomain,
    table: HashMap<(State, ActionId), Distribution>,
    goal: HashMap<State, bool>,
}

impl<'a> Successors<'a> {
    pub(crate) fn new(domain: &'a PlanningDomain) -> Self {
        Successors {
            domain,
            table: HashMap::new(),
            goal: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, state: State, action: ActionId) -> Result<Rc<[(State, Rational)]>> {
        if let Some(v) = self.table.get(&(state, action)) {
            return Ok(v.clone());
        }
        let v: Rc<[(State, Rational)]> = self.domain.successors(state, action)?.into();
        self.table.insert((state, action), v.clone());
        Ok(v)
    }

    pub(crate) fn is_goal(&mut self, state: State) -> bool {
        let domain = self.domain;
        *self.goal.entry(state).or_insert_with(|| domain.goal.eval(state))
    }
}

/// Evaluates any plan class; partial-order plans use `interpretation`.
pub fn eval_plan(domain: &PlanningDomain, plan: &Plan, interpretation: Interpretation) -> Result<EvaluationResult> {
    match plan {
        Plan::TotalOrder(p) => eval_total_order(domain, p),
        Plan::Acyclic(p) => eval_acyclic(domain, p),
        Plan::Looping(p) => eval_looping(domain, p),
        Plan::PartialOrder(p) => eval_partial(domain, p, interpretation),
    }
}

/// Expected number of times `action` runs before execution stops.
pub fn expected_action_count(domain: &PlanningDomain, plan: &Plan, action: &str) -> Result<ExpectedCount> {
    let target = domain.action_index(action)?;
    match plan {
        Plan::TotalOrder(p) => {
            let bound = crate::plans::BoundController::chain(&p.bind(domain)?);
            propagate::expected_count(domain, &bound, target).map(ExpectedCount::Finite)
        }
        Plan::Acyclic(p) => propagate::expected_count(domain, &p.bind(domain, true)?, target).map(ExpectedCount::Finite),
        Plan::Looping(p) => looping::expected_count(domain, &p.bind(domain, false)?, target),
        Plan::PartialOrder(_) => Err(Error::Unsupported(
            "expected action counts are defined for total-order, acyclic and looping plans".into(),
        )),
    }
}

pub(crate) fn bound_value(domain: &PlanningDomain, bound: &BoundController, acyclic: bool) -> Result<Rational> {
    if acyclic {
        propagate::controller_value(domain, bound, None).map(|(v, _)| v)
    } else {
        looping::controller_value(domain, bound).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::rational::{parse_rational, ratio};

    #[test]
    fn threshold_is_inclusive() {
        assert!(meets_threshold(&ratio(1, 2), &ratio(1, 2)));
        assert!(meets_threshold(&ratio(7, 16), &parse_rational("0.4375").unwrap()));
        assert!(!meets_threshold(&ratio(7, 16), &parse_rational("0.44").unwrap()));
    }

    #[test]
    fn display_has_exact_and_decimal_forms() {
        let d = bundled::sandcastle();
        let r = eval_plan(&d, &bundled::fig2a(), Interpretation::Average).unwrap();
        assert_eq!(r.to_string(), "7/16 (0.437500)");
    }

    #[test]
    fn expected_counts() {
        let d = bundled::sandcastle();
        assert_eq!(
            expected_action_count(&d, &bundled::fig2b(), "dig-moat").unwrap(),
            ExpectedCount::Finite(ratio(7, 4))
        );
        assert_eq!(
            expected_action_count(&d, &bundled::fig2a(), "dig-moat").unwrap(),
            ExpectedCount::Finite(ratio(2, 1))
        );
        assert_eq!(
            expected_action_count(&d, &bundled::fig2d(), "dig-moat").unwrap(),
            ExpectedCount::Finite(ratio(3, 1))
        );
        assert!(expected_action_count(&d, &bundled::fig2c(), "dig-moat").is_err());
    }
}

//! Forward propagation of the joint (step, state) distribution, one action
//! per round. Exact for acyclic controllers, which stop after at most |Q|
//! rounds, and for any controller cut off at a fixed horizon.

use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Zero};

use super::{Diagnostics, EvaluationResult, Successors};
use crate::domain::{ActionId, PlanningDomain};
use crate::error::Result;
use crate::plans::{AcyclicPlan, BoundController, LoopingPlan, TotalOrderPlan};
use crate::rational::Rational;
use crate::state::State;

/// Runs at most `rounds` actions (unbounded when `None`), calling `visit` on
/// every `(step, state, mass)` before its action executes. Returns the goal
/// mass and the number of distinct product states visited.
fn propagate<F>(domain: &PlanningDomain, bound: &BoundController, rounds: Option<usize>, mut visit: F) -> Result<(Rational, usize)>
where
    F: FnMut(usize, &Rational),
{
    let mut succ = Successors::new(domain);
    if succ.is_goal(domain.initial) {
        return Ok((Rational::one(), 0));
    }
    let Some(start) = bound.start else {
        return Ok((Rational::zero(), 0));
    };
    let mut goal = Rational::zero();
    let mut seen: HashSet<(usize, State)> = HashSet::new();
    let mut dist: BTreeMap<(usize, State), Rational> = BTreeMap::new();
    dist.insert((start, domain.initial), Rational::one());
    let mut round = 0;
    while !dist.is_empty() && rounds.is_none_or(|r| round < r) {
        round += 1;
        let mut next: BTreeMap<(usize, State), Rational> = BTreeMap::new();
        for ((step, state), mass) in dist {
            seen.insert((step, state));
            visit(step, &mass);
            for (t, p) in succ.get(state, bound.actions[step])?.iter() {
                let m = &mass * p;
                if succ.is_goal(*t) {
                    goal += m;
                } else if let Some(q) = bound.successor_step(step, *t) {
                    *next.entry((q, *t)).or_insert_with(Rational::zero) += m;
                }
            }
        }
        dist = next;
    }
    Ok((goal, seen.len()))
}

pub(crate) fn controller_value(
    domain: &PlanningDomain,
    bound: &BoundController,
    rounds: Option<usize>,
) -> Result<(Rational, Diagnostics)> {
    let (value, reachable) = propagate(domain, bound, rounds, |_, _| {})?;
    Ok((
        value,
        Diagnostics {
            reachable_states: reachable,
            pivots: 0,
        },
    ))
}

pub(crate) fn expected_count(domain: &PlanningDomain, bound: &BoundController, target: ActionId) -> Result<Rational> {
    let mut count = Rational::zero();
    propagate(domain, bound, None, |step, mass| {
        if bound.actions[step] == target {
            count += mass;
        }
    })?;
    Ok(count)
}

pub(crate) fn sequence_value(domain: &PlanningDomain, actions: &[ActionId]) -> Result<(Rational, Diagnostics)> {
    controller_value(domain, &BoundController::chain(actions), None)
}

/// Probability of reaching the goal at or before the last step.
pub fn eval_total_order(domain: &PlanningDomain, plan: &TotalOrderPlan) -> Result<EvaluationResult> {
    let (value, d) = sequence_value(domain, &plan.bind(domain)?)?;
    Ok(EvaluationResult::plain(value, d))
}

pub fn eval_acyclic(domain: &PlanningDomain, plan: &AcyclicPlan) -> Result<EvaluationResult> {
    let (value, d) = controller_value(domain, &plan.bind(domain, true)?, None)?;
    Ok(EvaluationResult::plain(value, d))
}

/// A looping plan cut off after `horizon` actions.
pub fn eval_looping_truncated(domain: &PlanningDomain, plan: &LoopingPlan, horizon: usize) -> Result<EvaluationResult> {
    let (value, d) = controller_value(domain, &plan.bind(domain, false)?, Some(horizon))?;
    Ok(EvaluationResult::plain(value, d))
}

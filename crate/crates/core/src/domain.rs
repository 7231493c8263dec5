//! Planning domains: variables, initial state, goal condition, actions, and
//! one of three transition backends.

use std::collections::{BTreeMap, HashSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::TransitionCircuit;
use crate::error::{Error, Result};
use crate::formula::Condition;
use crate::rational::{format_exact, is_probability, Rational};
use crate::report::{ValidationReport, Violation};
use crate::state::{State, MAX_WIDTH};

/// Largest variable count for which full successor or state enumeration is
/// attempted.
pub const ENUMERATION_CAP: usize = 20;

/// States checked when a domain is too wide to enumerate.
pub const VALIDATION_SAMPLE: usize = 1024;
/// Fixed seed of the validation sample.
pub const VALIDATION_SEED: u64 = 0x5EED_D0A1;

pub type ActionId = usize;

/// A partial assignment; unmentioned variables keep their value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Effect(pub Vec<(usize, bool)>);

impl Effect {
    pub fn apply(&self, state: State) -> State {
        self.0.iter().fold(state, |s, &(var, value)| s.with(var, value))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub probability: Rational,
    pub effect: Effect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsoCase {
    pub condition: Condition,
    pub outcomes: Vec<Outcome>,
}

/// A probabilistic state-space operator: condition-guarded outcome lists,
/// first matching case wins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PsoOperator {
    pub name: String,
    pub cases: Vec<PsoCase>,
}

impl PsoOperator {
    pub fn firing_case(&self, state: State) -> Option<&PsoCase> {
        self.cases.iter().find(|c| c.condition.eval(state))
    }

    fn successors(&self, state: State) -> Vec<(State, Rational)> {
        let mut acc: BTreeMap<State, Rational> = BTreeMap::new();
        if let Some(case) = self.firing_case(state) {
            for outcome in &case.outcomes {
                *acc.entry(outcome.effect.apply(state)).or_insert_with(Rational::zero) += &outcome.probability;
            }
        }
        acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
    }
}

/// Explicit transition rows, one map per action. A missing row is a defect.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatTable {
    pub rows: Vec<BTreeMap<State, Vec<(State, Rational)>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Flat(FlatTable),
    Pso(Vec<PsoOperator>),
    Circuit(Vec<TransitionCircuit>),
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Flat(_) => "flat",
            Backend::Pso(_) => "pso",
            Backend::Circuit(_) => "circuit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanningDomain {
    pub name: String,
    pub variables: Vec<String>,
    pub initial: State,
    pub goal: Condition,
    pub actions: Vec<String>,
    pub backend: Backend,
}

impl PlanningDomain {
    /// Checks the structural invariants: unique names, widths, and one backend
    /// entry per action.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        initial: State,
        goal: Condition,
        actions: Vec<String>,
        backend: Backend,
    ) -> Result<Self> {
        let width = variables.len();
        if width >= MAX_WIDTH {
            return Err(Error::Unsupported(format!("{width} variables exceeds the supported {}", MAX_WIDTH - 1)));
        }
        initial.check_width(width)?;
        let mut seen = HashSet::new();
        for v in &variables {
            if !seen.insert(v.as_str()) {
                return Err(Error::Unsupported(format!("duplicate variable `{v}`")));
            }
        }
        let mut seen = HashSet::new();
        for a in &actions {
            if !seen.insert(a.as_str()) {
                return Err(Error::Unsupported(format!("duplicate action `{a}`")));
            }
        }
        if goal.max_var().is_some_and(|v| v >= width) {
            return Err(Error::Unsupported("goal references an undeclared variable".into()));
        }
        let entries = match &backend {
            Backend::Flat(t) => t.rows.len(),
            Backend::Pso(ops) => {
                for (op, a) in ops.iter().zip(&actions) {
                    if &op.name != a {
                        return Err(Error::Unsupported(format!("operator `{}` listed as action `{a}`", op.name)));
                    }
                }
                ops.len()
            }
            Backend::Circuit(cs) => {
                for c in cs {
                    if c.before_width != width || c.after_width != width {
                        return Err(Error::WidthMismatch {
                            expected: width,
                            found: if c.before_width != width { c.before_width } else { c.after_width },
                        });
                    }
                }
                cs.len()
            }
        };
        if entries != actions.len() {
            return Err(Error::Unsupported(format!(
                "{} backend has {entries} entries for {} actions",
                backend.kind(),
                actions.len()
            )));
        }
        Ok(PlanningDomain {
            name: name.into(),
            variables,
            initial,
            goal,
            actions,
            backend,
        })
    }

    pub fn width(&self) -> usize {
        self.variables.len()
    }

    pub fn action_index(&self, name: &str) -> Result<ActionId> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| Error::UnknownAction(name.to_string()))
    }

    pub fn is_goal(&self, state: State) -> Result<bool> {
        state.check_width(self.width())?;
        Ok(self.goal.eval(state))
    }

    /// Successor distribution by action index: nonzero entries only, in
    /// ascending state order.
    pub fn successors(&self, state: State, action: ActionId) -> Result<Vec<(State, Rational)>> {
        state.check_width(self.width())?;
        if action >= self.actions.len() {
            return Err(Error::UnknownAction(format!("#{action}")));
        }
        match &self.backend {
            Backend::Flat(table) => Ok(table.rows[action].get(&state).cloned().unwrap_or_default()),
            Backend::Pso(ops) => Ok(ops[action].successors(state)),
            Backend::Circuit(cs) => {
                if self.width() > ENUMERATION_CAP {
                    return Err(Error::CapExceeded {
                        what: "circuit successor enumeration variable count",
                        count: self.width() as u64,
                        cap: ENUMERATION_CAP as u64,
                    });
                }
                cs[action].successors(state)
            }
        }
    }

    pub fn transition_prob_by_id(&self, state: State, action: ActionId, next: State) -> Result<Rational> {
        state.check_width(self.width())?;
        next.check_width(self.width())?;
        match &self.backend {
            Backend::Circuit(cs) => cs[action].eval(state, next),
            _ => Ok(self
                .successors(state, action)?
                .into_iter()
                .find(|(s, _)| *s == next)
                .map(|(_, p)| p)
                .unwrap_or_else(Rational::zero)),
        }
    }
}

/// Exact probability of `state → next` under the named action.
pub fn transition_prob(domain: &PlanningDomain, state: State, action: &str, next: State) -> Result<Rational> {
    let a = domain.action_index(action)?;
    domain.transition_prob_by_id(state, a, next)
}

pub fn successor_distribution(domain: &PlanningDomain, state: State, action: &str) -> Result<Vec<(State, Rational)>> {
    let a = domain.action_index(action)?;
    domain.successors(state, a)
}

pub fn is_goal(domain: &PlanningDomain, state: State) -> Result<bool> {
    domain.is_goal(state)
}

/// Checks that every checked `(state, action)` row is a probability
/// distribution. Domains wider than [`ENUMERATION_CAP`] are checked on a
/// seeded sample of [`VALIDATION_SAMPLE`] states and the report is flagged.
pub fn validate_domain(domain: &PlanningDomain) -> ValidationReport {
    let width = domain.width();
    let mut report = ValidationReport::default();
    let states: Vec<State> = if width <= ENUMERATION_CAP {
        State::all(width).collect()
    } else {
        report.sampled = true;
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let mut states = vec![domain.initial];
        states.extend((1..VALIDATION_SAMPLE).map(|_| State::new(rng.random::<u64>(), width)));
        states
    };
    for &state in &states {
        for (a, name) in domain.actions.iter().enumerate() {
            let dist = match &domain.backend {
                // sampled circuit rows are still enumerated exactly
                Backend::Circuit(cs) => cs[a].successors(state),
                _ => domain.successors(state, a),
            };
            let violation = |defect: String, sum: Option<Rational>| Violation {
                state: Some(state),
                action: Some(name.clone()),
                defect,
                sum,
            };
            match dist {
                Err(e) => report.push(violation(e.to_string(), None)),
                Ok(dist) => {
                    let mut sum = Rational::zero();
                    for (next, p) in &dist {
                        if !is_probability(p) {
                            report.push(violation(format!("probability {} to {next}", format_exact(p)), None));
                        }
                        sum += p;
                    }
                    if !sum.is_one() {
                        report.push(violation("successor probabilities do not sum to 1".into(), Some(sum)));
                    }
                }
            }
        }
    }
    report
}

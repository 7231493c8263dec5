//! Bounded plan existence: enumerate candidate plans in a fixed canonical
//! order, evaluate each exactly, and stop at the first that meets the
//! threshold.
//!
//! Pruning uses finite-horizon optimal values `V_h(s)`: no plan executing at
//! most `h` more actions from `s` can beat `V_h(s)`. A subtree is cut only
//! when its bound is below the threshold and no better than the best value
//! already seen, so the reported maximum stays exact when nothing is found.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};

use crate::domain::{ActionId, PlanningDomain, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::eval::bound_value;
use crate::formula::Condition;
use crate::plans::{BoundController, ControllerPlan, Edge, Observation, Plan, PlanStep, TotalOrderPlan};
use crate::rational::Rational;
use crate::report::ValidationReport;
use crate::state::State;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Candidates evaluated per parallel batch in controller search.
const BATCH: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum plan length (total order) or step count (controllers).
    pub horizon: usize,
    pub threshold: Rational,
    pub node_cap: u64,
    pub time_cap: Option<Duration>,
    /// Use the optimal-value bound to cut hopeless branches.
    pub prune: bool,
}

impl SearchBudget {
    pub fn new(horizon: usize, threshold: Rational) -> Self {
        SearchBudget {
            horizon,
            threshold,
            node_cap: DEFAULT_NODE_CAP,
            time_cap: None,
            prune: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    pub witness: Option<Plan>,
    /// Value of the witness.
    pub value: Option<Rational>,
    /// Largest value among evaluated candidates; the maximum over the whole
    /// space when `exhausted` holds and nothing was found.
    pub best: Option<Rational>,
    /// Candidate plans visited.
    pub nodes: u64,
    /// The space was fully covered before any cap was hit.
    pub exhausted: bool,
}

/// `V_h(s)` for `h = 0..=horizon`, with goal states pinned at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueBound {
    tables: Vec<HashMap<State, Rational>>,
}

impl ValueBound {
    pub fn horizon(&self) -> usize {
        self.tables.len() - 1
    }

    /// `V_h(s)`, or `None` if `s` was not tabulated at horizon `h`.
    pub fn get(&self, h: usize, state: State) -> Option<&Rational> {
        self.tables.get(h)?.get(&state)
    }
}

fn backup(domain: &PlanningDomain, layers: &[Vec<State>], horizon: usize) -> Result<ValueBound> {
    // layers[d] holds the states that need V_{horizon-d}
    let mut tables: Vec<HashMap<State, Rational>> = Vec::with_capacity(horizon + 1);
    for h in 0..=horizon {
        let states = &layers[horizon - h];
        let prev = tables.last();
        let values = crate::par::map(states, |&s| -> Result<Rational> {
            if domain.goal.eval(s) {
                return Ok(Rational::one());
            }
            let Some(prev) = prev else {
                return Ok(Rational::zero());
            };
            let mut best = Rational::zero();
            for a in 0..domain.actions.len() {
                let mut v = Rational::zero();
                for (t, p) in domain.successors(s, a)? {
                    v += p * &prev[&t];
                }
                if v > best {
                    best = v;
                }
            }
            Ok(best)
        });
        let mut table = HashMap::with_capacity(states.len());
        for (&s, v) in states.iter().zip(values) {
            table.insert(s, v?);
        }
        tables.push(table);
    }
    Ok(ValueBound { tables })
}

/// Finite-horizon optimal values over every state of the domain.
pub fn optimal_value_bound(domain: &PlanningDomain, horizon: usize) -> Result<ValueBound> {
    if domain.width() > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "value-bound state enumeration variable count",
            count: domain.width() as u64,
            cap: ENUMERATION_CAP as u64,
        });
    }
    let all: Vec<State> = State::all(domain.width()).collect();
    let layers = vec![all; horizon + 1];
    backup(domain, &layers, horizon)
}

/// The same values restricted to states reachable from the initial state:
/// `V_h` is tabulated on every state reachable within `horizon - h` steps.
pub fn reachable_value_bound(domain: &PlanningDomain, horizon: usize) -> Result<ValueBound> {
    let mut seen: HashSet<State> = HashSet::from([domain.initial]);
    let mut frontier = vec![domain.initial];
    let mut layers = vec![vec![domain.initial]];
    for _ in 0..horizon {
        let mut next = Vec::new();
        for &s in &frontier {
            if domain.goal.eval(s) {
                continue;
            }
            for a in 0..domain.actions.len() {
                for (t, _) in domain.successors(s, a)? {
                    if seen.insert(t) {
                        next.push(t);
                    }
                }
            }
        }
        let mut layer = layers.last().unwrap().clone();
        layer.extend(next.iter().copied());
        layers.push(layer);
        frontier = next;
    }
    backup(domain, &layers, horizon)
}

struct Clock {
    start: Instant,
    cap: Option<Duration>,
}

impl Clock {
    fn expired(&self) -> bool {
        self.cap.is_some_and(|c| self.start.elapsed() > c)
    }
}

fn max_into(best: &mut Option<Rational>, v: &Rational) {
    if best.as_ref().is_none_or(|b| v > b) {
        *best = Some(v.clone());
    }
}

#[derive(Default)]
struct Subtree {
    witness: Option<(Vec<ActionId>, Rational)>,
    best: Option<Rational>,
    nodes: u64,
    capped: bool,
    aborted: bool,
}

struct TotalSearch<'a> {
    domain: &'a PlanningDomain,
    budget: &'a SearchBudget,
    bound: Option<ValueBound>,
    clock: Clock,
    found_at: &'a AtomicUsize,
    index: usize,
    succ: HashMap<(State, ActionId), Vec<(State, Rational)>>,
    out: Subtree,
    prefix: Vec<ActionId>,
}

impl TotalSearch<'_> {
    fn successors(&mut self, s: State, a: ActionId) -> Result<Vec<(State, Rational)>> {
        if let Some(v) = self.succ.get(&(s, a)) {
            return Ok(v.clone());
        }
        let v = self.domain.successors(s, a)?;
        self.succ.insert((s, a), v.clone());
        Ok(v)
    }

    /// Returns `false` when the search must stop.
    fn visit(&mut self, dist: &BTreeMap<State, Rational>, goal: &Rational) -> Result<bool> {
        self.out.nodes += 1;
        if self.out.nodes > self.budget.node_cap || (self.out.nodes.is_multiple_of(1024) && self.clock.expired()) {
            self.out.capped = true;
            return Ok(false);
        }
        if self.found_at.load(Ordering::Relaxed) < self.index {
            self.out.aborted = true;
            return Ok(false);
        }
        max_into(&mut self.out.best, goal);
        if *goal >= self.budget.threshold {
            self.out.witness = Some((self.prefix.clone(), goal.clone()));
            self.found_at.fetch_min(self.index, Ordering::Relaxed);
            return Ok(false);
        }
        let depth = self.prefix.len();
        if depth == self.budget.horizon {
            return Ok(true);
        }
        if let Some(bound) = &self.bound {
            let remaining = self.budget.horizon - depth;
            let mut b = goal.clone();
            for (s, p) in dist {
                b += p * bound.get(remaining, *s).expect("reachable state is tabulated");
            }
            if b < self.budget.threshold && self.out.best.as_ref().is_some_and(|best| b <= *best) {
                return Ok(true);
            }
        }
        for a in 0..self.domain.actions.len() {
            if !self.child(dist, goal, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn child(&mut self, dist: &BTreeMap<State, Rational>, goal: &Rational, a: ActionId) -> Result<bool> {
        let mut next: BTreeMap<State, Rational> = BTreeMap::new();
        let mut g = goal.clone();
        for (s, p) in dist {
            for (t, q) in self.successors(*s, a)? {
                let m = p * q;
                if self.domain.goal.eval(t) {
                    g += m;
                } else {
                    *next.entry(t).or_insert_with(Rational::zero) += m;
                }
            }
        }
        self.prefix.push(a);
        let go_on = self.visit(&next, &g)?;
        self.prefix.pop();
        Ok(go_on)
    }
}

fn names(domain: &PlanningDomain, actions: &[ActionId]) -> TotalOrderPlan {
    TotalOrderPlan {
        steps: actions.iter().map(|&a| domain.actions[a].clone()).collect(),
    }
}

fn found(witness: Plan, value: Rational, nodes: u64) -> SearchOutcome {
    SearchOutcome {
        found: true,
        witness: Some(witness),
        value: Some(value.clone()),
        best: Some(value),
        nodes,
        exhausted: false,
    }
}

/// Depth-first search over action sequences of length at most the horizon,
/// in lexicographic action order, checking every prefix. The root's subtrees
/// (one per first action) are searched independently and merged in order.
pub fn exists_total_order(domain: &PlanningDomain, budget: &SearchBudget) -> Result<SearchOutcome> {
    let clock = Clock {
        start: Instant::now(),
        cap: budget.time_cap,
    };
    let root_goal = domain.is_goal(domain.initial)?;
    let root_value = if root_goal { Rational::one() } else { Rational::zero() };
    if root_value >= budget.threshold {
        return Ok(found(Plan::TotalOrder(TotalOrderPlan::default()), root_value, 1));
    }
    let bound = if budget.prune {
        reachable_value_bound(domain, budget.horizon).ok()
    } else {
        None
    };
    let mut outcome = SearchOutcome {
        found: false,
        witness: None,
        value: None,
        best: Some(root_value.clone()),
        nodes: 1,
        exhausted: false,
    };
    if budget.horizon == 0 {
        outcome.exhausted = true;
        return Ok(outcome);
    }
    let root: BTreeMap<State, Rational> = BTreeMap::from([(domain.initial, Rational::one())]);
    let found_at = AtomicUsize::new(usize::MAX);
    let subtrees = crate::par::map_range(domain.actions.len(), |a| -> Result<Subtree> {
        let mut search = TotalSearch {
            domain,
            budget,
            bound: bound.clone(),
            clock: Clock {
                start: clock.start,
                cap: clock.cap,
            },
            found_at: &found_at,
            index: a,
            succ: HashMap::new(),
            out: Subtree {
                best: Some(root_value.clone()),
                ..Subtree::default()
            },
            prefix: Vec::new(),
        };
        search.child(&root, &root_value, a)?;
        Ok(search.out)
    });
    for sub in subtrees {
        let sub = sub?;
        if sub.aborted {
            break;
        }
        outcome.nodes += sub.nodes;
        if let Some(b) = &sub.best {
            max_into(&mut outcome.best, b);
        }
        // a witness past the cap would not have been reached sequentially
        if sub.capped || outcome.nodes > budget.node_cap {
            return Ok(outcome);
        }
        if let Some((actions, value)) = sub.witness {
            return Ok(SearchOutcome {
                nodes: outcome.nodes,
                ..found(Plan::TotalOrder(names(domain, &actions)), value, 0)
            });
        }
    }
    outcome.exhausted = true;
    Ok(outcome)
}

/// Fixed observation map shared by every candidate controller.
struct Observations<'a> {
    labels: &'a [String],
    written: &'a [Observation],
    bound: Vec<(Condition, usize)>,
}

fn bind_observations<'a>(
    domain: &PlanningDomain,
    labels: &'a [String],
    observations: &'a [Observation],
) -> Result<Observations<'a>> {
    let mut report = ValidationReport::default();
    if labels.is_empty() {
        report.defect("at least one label is required");
    }
    if !observations.last().is_some_and(|o| o.condition.is_true()) {
        report.defect("observation list is not total: the last entry must be `true`");
    }
    let mut bound = Vec::new();
    for o in observations {
        match labels.iter().position(|l| *l == o.label) {
            Some(l) => bound.push((o.condition.bind(&domain.variables)?, l)),
            None => report.defect(format!("observation maps to undeclared label `{}`", o.label)),
        }
    }
    if !report.ok() {
        return Err(Error::InvalidPlan(report));
    }
    Ok(Observations {
        labels,
        written: observations,
        bound,
    })
}

/// Number of choices for `delta(step, label)` among `n` steps.
fn choices(n: usize, step: usize, acyclic: bool) -> u128 {
    if acyclic {
        (n - step) as u128
    } else {
        n as u128 + 1
    }
}

fn candidate_count(actions: usize, n: usize, labels: usize, acyclic: bool) -> Option<u128> {
    let mut count: u128 = 1;
    for step in 0..n {
        count = count.checked_mul(actions as u128)?;
        for _ in 0..labels {
            count = count.checked_mul(choices(n, step, acyclic))?;
        }
    }
    Some(count)
}

/// Decodes candidate `index` of size `n`: the action map is the more
/// significant part (lexicographic over steps), then transitions by step and
/// label, each choice ordered undefined first, then targets ascending.
fn decode(index: u128, actions: usize, n: usize, obs: &Observations, acyclic: bool) -> BoundController {
    let labels = obs.labels.len();
    let mut rest = index;
    let mut next = vec![vec![None; labels]; n];
    for step in (0..n).rev() {
        for label in (0..labels).rev() {
            let c = choices(n, step, acyclic);
            let digit = (rest % c) as usize;
            rest /= c;
            next[step][label] = match digit {
                0 => None,
                d if acyclic => Some(step + d),
                d => Some(d - 1),
            };
        }
    }
    let mut pi = vec![0; n];
    for step in (0..n).rev() {
        pi[step] = (rest % actions as u128) as usize;
        rest /= actions as u128;
    }
    BoundController {
        actions: pi,
        start: Some(0),
        observations: obs.bound.clone(),
        next,
    }
}

fn to_plan(domain: &PlanningDomain, c: &BoundController, obs: &Observations, acyclic: bool) -> Plan {
    let name = |i: usize| format!("q{}", i + 1);
    let plan = ControllerPlan {
        steps: c
            .actions
            .iter()
            .enumerate()
            .map(|(i, &a)| PlanStep {
                name: name(i),
                action: domain.actions[a].clone(),
            })
            .collect(),
        start: c.start.map(name),
        labels: obs.labels.to_vec(),
        observations: obs.written.to_vec(),
        edges: c
            .next
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                row.iter().enumerate().filter_map(move |(l, t)| {
                    t.map(|t| Edge {
                        from: name(i),
                        label: obs.labels[l].clone(),
                        to: name(t),
                    })
                })
            })
            .collect(),
    };
    if acyclic {
        Plan::Acyclic(plan)
    } else {
        Plan::Looping(plan)
    }
}

fn exists_controller(
    domain: &PlanningDomain,
    budget: &SearchBudget,
    labels: &[String],
    observations: &[Observation],
    acyclic: bool,
) -> Result<SearchOutcome> {
    let clock = Clock {
        start: Instant::now(),
        cap: budget.time_cap,
    };
    let obs = bind_observations(domain, labels, observations)?;
    let empty = BoundController {
        actions: vec![],
        start: None,
        observations: obs.bound.clone(),
        next: vec![],
    };
    let root_value = bound_value(domain, &empty, true)?;
    if root_value >= budget.threshold {
        return Ok(found(to_plan(domain, &empty, &obs, acyclic), root_value, 1));
    }
    let bound = if budget.prune && acyclic {
        reachable_value_bound(domain, budget.horizon).ok()
    } else {
        None
    };
    let mut outcome = SearchOutcome {
        found: false,
        witness: None,
        value: None,
        best: Some(root_value),
        nodes: 1,
        exhausted: false,
    };
    let a = domain.actions.len();
    for n in 1..=budget.horizon {
        if let Some(bound) = &bound {
            let v = bound.get(n, domain.initial).expect("initial state is tabulated");
            if *v < budget.threshold && outcome.best.as_ref().is_some_and(|b| v <= b) {
                continue;
            }
        }
        let Some(total) = candidate_count(a, n, labels.len(), acyclic) else {
            return Ok(outcome);
        };
        let mut start: u128 = 0;
        while start < total {
            if clock.expired() {
                return Ok(outcome);
            }
            let len = (total - start).min(BATCH as u128) as usize;
            let values = crate::par::map_range(len, |i| {
                let c = decode(start + i as u128, a, n, &obs, acyclic);
                bound_value(domain, &c, acyclic)
            });
            for (i, v) in values.into_iter().enumerate() {
                if outcome.nodes == budget.node_cap {
                    return Ok(outcome);
                }
                outcome.nodes += 1;
                let v = v?;
                max_into(&mut outcome.best, &v);
                if v >= budget.threshold {
                    let c = decode(start + i as u128, a, n, &obs, acyclic);
                    return Ok(SearchOutcome {
                        nodes: outcome.nodes,
                        ..found(to_plan(domain, &c, &obs, acyclic), v, 0)
                    });
                }
            }
            start += len as u128;
        }
    }
    outcome.exhausted = true;
    Ok(outcome)
}

/// Searches acyclic controllers with at most `budget.horizon` steps over the
/// given labels and observation list. Sizes are tried in increasing order.
pub fn exists_acyclic(
    domain: &PlanningDomain,
    budget: &SearchBudget,
    labels: &[String],
    observations: &[Observation],
) -> Result<SearchOutcome> {
    exists_controller(domain, budget, labels, observations, true)
}

/// As [`exists_acyclic`], with transitions allowed to any step.
pub fn exists_looping(
    domain: &PlanningDomain,
    budget: &SearchBudget,
    labels: &[String],
    observations: &[Observation],
) -> Result<SearchOutcome> {
    exists_controller(domain, budget, labels, observations, false)
}

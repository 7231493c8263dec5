//! The four plan classes, their structural validation, and linear-extension
//! enumeration for partially ordered plans.
//!
//! Plans are stored by name as written in plan files. [`validate_plan`]
//! checks them against a domain; evaluators then work on the index-resolved
//! [`BoundController`] form.

use std::collections::{HashMap, HashSet};

use crate::domain::{ActionId, PlanningDomain};
use crate::error::{Error, Result};
use crate::formula::{Condition, Formula};
use crate::report::ValidationReport;
use crate::state::State;

/// Default cap on the number of linear extensions enumerated.
pub const EXTENSION_CAP: usize = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TotalOrderPlan {
    pub steps: Vec<String>,
}

impl TotalOrderPlan {
    pub fn new<S: Into<String>>(steps: impl IntoIterator<Item = S>) -> Self {
        TotalOrderPlan {
            steps: steps.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same plan as a one-label controller whose steps form a chain.
    pub fn to_chain_controller(&self) -> ControllerPlan {
        let names: Vec<String> = (0..self.steps.len()).map(|i| format!("s{}", i + 1)).collect();
        ControllerPlan {
            labels: vec!["any".into()],
            observations: vec![Observation {
                condition: Formula::True,
                label: "any".into(),
            }],
            steps: names
                .iter()
                .zip(&self.steps)
                .map(|(n, a)| PlanStep {
                    name: n.clone(),
                    action: a.clone(),
                })
                .collect(),
            edges: names
                .windows(2)
                .map(|w| Edge {
                    from: w[0].clone(),
                    label: "any".into(),
                    to: w[1].clone(),
                })
                .collect(),
            start: names.first().cloned(),
        }
    }

    /// The same plan as a partial order whose precedence relation is a chain.
    pub fn to_chain_partial(&self) -> PartialOrderPlan {
        let nodes: Vec<PlanStep> = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, a)| PlanStep {
                name: format!("n{}", i + 1),
                action: a.clone(),
            })
            .collect();
        let before = nodes
            .windows(2)
            .map(|w| (w[0].name.clone(), w[1].name.clone()))
            .collect();
        PartialOrderPlan { nodes, before }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub name: String,
    pub action: String,
}

/// One entry of the ordered observation list; the first matching condition
/// decides the effect label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub condition: Formula,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub label: String,
    pub to: String,
}

/// A finite-state controller: steps with actions, effect labels assigned to
/// the new domain state, and a partial step-transition function.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ControllerPlan {
    pub steps: Vec<PlanStep>,
    pub start: Option<String>,
    pub labels: Vec<String>,
    pub observations: Vec<Observation>,
    pub edges: Vec<Edge>,
}

impl ControllerPlan {
    /// The one-step plan that applies `action` forever.
    pub fn constant(action: impl Into<String>) -> Self {
        ControllerPlan {
            steps: vec![PlanStep {
                name: "q".into(),
                action: action.into(),
            }],
            start: Some("q".into()),
            labels: vec!["any".into()],
            observations: vec![Observation {
                condition: Formula::True,
                label: "any".into(),
            }],
            edges: vec![Edge {
                from: "q".into(),
                label: "any".into(),
                to: "q".into(),
            }],
        }
    }
}

pub type AcyclicPlan = ControllerPlan;
pub type LoopingPlan = ControllerPlan;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialOrderPlan {
    pub nodes: Vec<PlanStep>,
    /// `(a, b)`: node `a` must precede node `b`.
    pub before: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    TotalOrder(TotalOrderPlan),
    Acyclic(AcyclicPlan),
    Looping(LoopingPlan),
    PartialOrder(PartialOrderPlan),
}

impl Plan {
    pub fn class_keyword(&self) -> &'static str {
        match self {
            Plan::TotalOrder(_) => "total-order",
            Plan::Acyclic(_) => "acyclic",
            Plan::Looping(_) => "looping",
            Plan::PartialOrder(_) => "partial-order",
        }
    }
}

/// Controller with every name resolved to an index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundController {
    pub actions: Vec<ActionId>,
    /// `None` for the empty plan.
    pub start: Option<usize>,
    pub observations: Vec<(Condition, usize)>,
    /// `next[step][label]`
    pub next: Vec<Vec<Option<usize>>>,
}

impl BoundController {
    pub fn label_of(&self, state: State) -> usize {
        self.observations
            .iter()
            .find(|(c, _)| c.eval(state))
            .map(|&(_, l)| l)
            .expect("observation list ends with a catch-all")
    }

    pub fn successor_step(&self, step: usize, state: State) -> Option<usize> {
        self.next[step][self.label_of(state)]
    }

    pub fn step_count(&self) -> usize {
        self.actions.len()
    }

    /// A one-label chain running `actions` in order.
    pub fn chain(actions: &[ActionId]) -> Self {
        let n = actions.len();
        BoundController {
            actions: actions.to_vec(),
            start: (n > 0).then_some(0),
            observations: vec![(Condition::True, 0)],
            next: (0..n).map(|i| vec![(i + 1 < n).then_some(i + 1)]).collect(),
        }
    }
}

fn index_of(names: &[String], name: &str) -> Option<usize> {
    names.iter().position(|n| n == name)
}

fn duplicates<'a>(names: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for n in names {
        if !seen.insert(n) && !dups.contains(&n) {
            dups.push(n);
        }
    }
    dups
}

fn validate_controller(plan: &ControllerPlan, domain: &PlanningDomain, require_acyclic: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    let step_names: Vec<String> = plan.steps.iter().map(|s| s.name.clone()).collect();
    for d in duplicates(step_names.iter().map(String::as_str)) {
        report.defect(format!("duplicate step `{d}`"));
    }
    for d in duplicates(plan.labels.iter().map(String::as_str)) {
        report.defect(format!("duplicate label `{d}`"));
    }
    for step in &plan.steps {
        if domain.action_index(&step.action).is_err() {
            report.defect(format!("step `{}` uses unknown action `{}`", step.name, step.action));
        }
    }
    match &plan.start {
        Some(s) if index_of(&step_names, s).is_none() => report.defect(format!("start step `{s}` is not a step")),
        None if !plan.steps.is_empty() => report.defect("missing start step"),
        _ => {}
    }
    for obs in &plan.observations {
        if index_of(&plan.labels, &obs.label).is_none() {
            report.defect(format!("observation maps to undeclared label `{}`", obs.label));
        }
        for v in obs.condition.variables() {
            if index_of(&domain.variables, v).is_none() {
                report.defect(format!("observation reads unknown variable `{v}`"));
            }
        }
    }
    let total = plan.observations.last().is_some_and(|o| o.condition.is_true());
    if !total && !plan.steps.is_empty() {
        report.defect("observation list is not total: the last entry must be `true`");
    }
    let mut seen_edges: HashMap<(&str, &str), &str> = HashMap::new();
    for e in &plan.edges {
        if index_of(&step_names, &e.from).is_none() {
            report.defect(format!("edge from unknown step `{}`", e.from));
        }
        if index_of(&step_names, &e.to).is_none() {
            report.defect(format!("edge to unknown step `{}`", e.to));
        }
        if index_of(&plan.labels, &e.label).is_none() {
            report.defect(format!("edge uses undeclared label `{}`", e.label));
        }
        if let Some(prev) = seen_edges.insert((&e.from, &e.label), &e.to) {
            if prev != e.to {
                report.defect(format!("step `{}` has two targets for label `{}`", e.from, e.label));
            }
        }
    }
    if require_acyclic && report.ok() {
        let n = plan.steps.len();
        let mut succ = vec![Vec::new(); n];
        for e in &plan.edges {
            let from = index_of(&step_names, &e.from).unwrap();
            let to = index_of(&step_names, &e.to).unwrap();
            succ[from].push(to);
        }
        if let Some(cycle_at) = find_cycle(&succ) {
            report.defect(format!("step transitions contain a cycle through `{}`", step_names[cycle_at]));
        }
    }
    report
}

/// Some node lying on a cycle, if the graph has one.
fn find_cycle(succ: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&child) = succ[node].get(*next) {
                *next += 1;
                match mark[child] {
                    Mark::Active => return Some(child),
                    Mark::New => {
                        mark[child] = Mark::Active;
                        stack.push((child, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

fn validate_partial(plan: &PartialOrderPlan, domain: &PlanningDomain) -> ValidationReport {
    let mut report = ValidationReport::default();
    for d in duplicates(plan.nodes.iter().map(|n| n.name.as_str())) {
        report.defect(format!("duplicate node `{d}`"));
    }
    for node in &plan.nodes {
        if domain.action_index(&node.action).is_err() {
            report.defect(format!("node `{}` uses unknown action `{}`", node.name, node.action));
        }
    }
    match precedence_graph(plan) {
        Err(e) => report.defect(e),
        Ok(succ) => {
            if let Some(at) = find_cycle(&succ) {
                report.defect(format!("precedence constraints contain a cycle through `{}`", plan.nodes[at].name));
            }
        }
    }
    report
}

fn precedence_graph(plan: &PartialOrderPlan) -> std::result::Result<Vec<Vec<usize>>, String> {
    let names: Vec<String> = plan.nodes.iter().map(|n| n.name.clone()).collect();
    let mut succ = vec![Vec::new(); names.len()];
    for (a, b) in &plan.before {
        let ia = index_of(&names, a).ok_or_else(|| format!("constraint names unknown node `{a}`"))?;
        let ib = index_of(&names, b).ok_or_else(|| format!("constraint names unknown node `{b}`"))?;
        succ[ia].push(ib);
    }
    Ok(succ)
}

/// Structural checks for any plan class against `domain`.
pub fn validate_plan(plan: &Plan, domain: &PlanningDomain) -> ValidationReport {
    match plan {
        Plan::TotalOrder(p) => {
            let mut report = ValidationReport::default();
            for (i, a) in p.steps.iter().enumerate() {
                if domain.action_index(a).is_err() {
                    report.defect(format!("step {} uses unknown action `{a}`", i + 1));
                }
            }
            report
        }
        Plan::Acyclic(p) => validate_controller(p, domain, true),
        Plan::Looping(p) => validate_controller(p, domain, false),
        Plan::PartialOrder(p) => validate_partial(p, domain),
    }
}

impl TotalOrderPlan {
    pub fn bind(&self, domain: &PlanningDomain) -> Result<Vec<ActionId>> {
        self.steps.iter().map(|a| domain.action_index(a)).collect()
    }
}

impl ControllerPlan {
    /// Validates (acyclicity only when `acyclic`) and resolves names.
    pub fn bind(&self, domain: &PlanningDomain, acyclic: bool) -> Result<BoundController> {
        let report = validate_controller(self, domain, acyclic);
        if !report.ok() {
            return Err(Error::InvalidPlan(report));
        }
        let step_names: Vec<String> = self.steps.iter().map(|s| s.name.clone()).collect();
        let actions = self
            .steps
            .iter()
            .map(|s| domain.action_index(&s.action))
            .collect::<Result<Vec<_>>>()?;
        let observations = self
            .observations
            .iter()
            .map(|o| Ok((o.condition.bind(&domain.variables)?, index_of(&self.labels, &o.label).unwrap())))
            .collect::<Result<Vec<_>>>()?;
        let mut next = vec![vec![None; self.labels.len()]; self.steps.len()];
        for e in &self.edges {
            let from = index_of(&step_names, &e.from).unwrap();
            let label = index_of(&self.labels, &e.label).unwrap();
            next[from][label] = index_of(&step_names, &e.to);
        }
        let start = self.start.as_ref().and_then(|s| index_of(&step_names, s));
        Ok(BoundController {
            actions,
            start: if self.steps.is_empty() { None } else { start },
            observations,
            next,
        })
    }
}

impl PartialOrderPlan {
    pub fn bind(&self, domain: &PlanningDomain) -> Result<Vec<ActionId>> {
        let report = validate_partial(self, domain);
        if !report.ok() {
            return Err(Error::InvalidPlan(report));
        }
        self.nodes.iter().map(|n| domain.action_index(&n.action)).collect()
    }

    /// Predecessor bitmasks over node indices.
    fn predecessor_masks(&self) -> Result<Vec<u128>> {
        if self.nodes.len() > 128 {
            return Err(Error::CapExceeded {
                what: "partial-order node count",
                count: self.nodes.len() as u64,
                cap: 128,
            });
        }
        let succ = precedence_graph(self).map_err(|e| {
            let mut r = ValidationReport::default();
            r.defect(e);
            Error::InvalidPlan(r)
        })?;
        if let Some(at) = find_cycle(&succ) {
            let mut r = ValidationReport::default();
            r.defect(format!("precedence constraints contain a cycle through `{}`", self.nodes[at].name));
            return Err(Error::InvalidPlan(r));
        }
        let mut preds = vec![0u128; self.nodes.len()];
        for (a, targets) in succ.iter().enumerate() {
            for &b in targets {
                preds[b] |= 1 << a;
            }
        }
        Ok(preds)
    }
}

/// Every linear extension of the precedence order as a sequence of node
/// indices, in canonical order: backtracking that always tries the available
/// minimal nodes in ascending declaration index.
pub fn linear_extension_orders(plan: &PartialOrderPlan, cap: usize) -> Result<Vec<Vec<usize>>> {
    let preds = plan.predecessor_masks()?;
    let n = preds.len();
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    extend(&preds, 0, &mut prefix, &mut out, cap)?;
    debug_assert!(out.iter().all(|o| o.len() == n));
    Ok(out)
}

fn extend(preds: &[u128], placed: u128, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) -> Result<()> {
    if prefix.len() == preds.len() {
        if out.len() == cap {
            return Err(Error::CapExceeded {
                what: "linear extension count",
                count: cap as u64 + 1,
                cap: cap as u64,
            });
        }
        out.push(prefix.clone());
        return Ok(());
    }
    for (node, &p) in preds.iter().enumerate() {
        if placed & (1 << node) == 0 && p & !placed == 0 {
            prefix.push(node);
            extend(preds, placed | (1 << node), prefix, out, cap)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// The consistent totally ordered plans, one per linear extension (duplicates
/// kept), in canonical order.
pub fn linear_extensions(plan: &PartialOrderPlan) -> Result<Vec<TotalOrderPlan>> {
    linear_extensions_capped(plan, EXTENSION_CAP)
}

pub fn linear_extensions_capped(plan: &PartialOrderPlan, cap: usize) -> Result<Vec<TotalOrderPlan>> {
    Ok(linear_extension_orders(plan, cap)?
        .into_iter()
        .map(|order| TotalOrderPlan {
            steps: order.into_iter().map(|i| plan.nodes[i].action.clone()).collect(),
        })
        .collect())
}

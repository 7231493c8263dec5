//! Seeded random instances for property tests, benchmarks and the
//! acceptance suite. All probabilities are dyadic so the domains compile to
//! circuits.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{Backend, Effect, Outcome, PlanningDomain, PsoCase, PsoOperator};
use crate::dsl::CnfFormula;
use crate::formula::{Condition, Formula};
use crate::plans::{ControllerPlan, Edge, Observation, PartialOrderPlan, PlanStep, TotalOrderPlan};
use crate::rational::ratio;
use crate::state::State;

fn literal<R: Rng>(rng: &mut R, width: usize) -> Condition {
    let v = Condition::Var(rng.random_range(0..width));
    if rng.random_bool(0.5) {
        Condition::Not(Box::new(v))
    } else {
        v
    }
}

fn conjunction<R: Rng>(rng: &mut R, width: usize, max_len: usize) -> Condition {
    let n = rng.random_range(1..=max_len);
    let mut xs: Vec<Condition> = (0..n).map(|_| literal(rng, width)).collect();
    if xs.len() == 1 {
        xs.pop().unwrap()
    } else {
        Condition::And(xs)
    }
}

fn effect<R: Rng>(rng: &mut R, width: usize) -> Effect {
    Effect(
        (0..width)
            .filter_map(|v| match rng.random_range(0..3) {
                0 => Some((v, false)),
                1 => Some((v, true)),
                _ => None,
            })
            .collect(),
    )
}

/// Splits 1 into at most `parts` multiples of 1/8.
fn dyadic_split<R: Rng>(rng: &mut R, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (0..parts - 1).map(|_| rng.random_range(0..=8)).collect();
    cuts.push(0);
    cuts.push(8);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0).collect()
}

/// A PSO domain over `width` variables `v0..` with `actions` operators
/// `a0..`. Each operator has up to two guarded cases plus a catch-all.
pub fn random_domain<R: Rng>(rng: &mut R, width: usize, actions: usize) -> PlanningDomain {
    let ops: Vec<PsoOperator> = (0..actions)
        .map(|a| {
            let guarded = rng.random_range(0..=2);
            let mut cases: Vec<PsoCase> = (0..=guarded)
                .map(|_| PsoCase {
                    condition: conjunction(rng, width, 2),
                    outcomes: dyadic_split(rng, 3)
                        .into_iter()
                        .map(|eighths| Outcome {
                            probability: ratio(eighths, 8),
                            effect: effect(rng, width),
                        })
                        .collect(),
                })
                .collect();
            cases.last_mut().unwrap().condition = Condition::True;
            PsoOperator {
                name: format!("a{a}"),
                cases,
            }
        })
        .collect();
    let initial = State::new(rng.random_range(0..1u64 << width), width);
    PlanningDomain::new(
        "random",
        (0..width).map(|v| format!("v{v}")).collect(),
        initial,
        conjunction(rng, width, 2),
        (0..actions).map(|a| format!("a{a}")).collect(),
        Backend::Pso(ops),
    )
    .expect("generated domain is well formed")
}

/// A random CNF with `clauses` clauses of one to three literals.
pub fn random_cnf<R: Rng>(rng: &mut R, num_vars: usize, clauses: usize) -> CnfFormula {
    CnfFormula {
        num_vars,
        clauses: (0..clauses)
            .map(|_| {
                let len = rng.random_range(1..=3.min(num_vars));
                let mut vars: Vec<i64> = (1..=num_vars as i64).collect();
                vars.shuffle(rng);
                vars.truncate(len);
                vars.into_iter()
                    .map(|v| if rng.random_bool(0.5) { -v } else { v })
                    .collect()
            })
            .collect(),
    }
}

fn action<R: Rng>(rng: &mut R, domain: &PlanningDomain) -> String {
    domain.actions[rng.random_range(0..domain.actions.len())].clone()
}

pub fn random_total_order<R: Rng>(rng: &mut R, domain: &PlanningDomain, len: usize) -> TotalOrderPlan {
    TotalOrderPlan {
        steps: (0..len).map(|_| action(rng, domain)).collect(),
    }
}

/// Two labels split on a random variable.
pub fn random_observations<R: Rng>(rng: &mut R, domain: &PlanningDomain) -> (Vec<String>, Vec<Observation>) {
    let v = domain.variables[rng.random_range(0..domain.width())].clone();
    (
        vec!["on".into(), "off".into()],
        vec![
            Observation {
                condition: Formula::Var(v),
                label: "on".into(),
            },
            Observation {
                condition: Formula::True,
                label: "off".into(),
            },
        ],
    )
}

/// A controller with `steps` steps. Transitions go forward only when
/// `acyclic`, anywhere otherwise; about one in four is left undefined.
pub fn random_controller<R: Rng>(rng: &mut R, domain: &PlanningDomain, steps: usize, acyclic: bool) -> ControllerPlan {
    let (labels, observations) = random_observations(rng, domain);
    let name = |i: usize| format!("q{}", i + 1);
    let mut edges = Vec::new();
    for i in 0..steps {
        for l in &labels {
            let lo = if acyclic { i + 1 } else { 0 };
            if lo < steps && rng.random_range(0..4) != 0 {
                edges.push(Edge {
                    from: name(i),
                    label: l.clone(),
                    to: name(rng.random_range(lo..steps)),
                });
            }
        }
    }
    ControllerPlan {
        steps: (0..steps)
            .map(|i| PlanStep {
                name: name(i),
                action: action(rng, domain),
            })
            .collect(),
        start: (steps > 0).then(|| name(0)),
        labels,
        observations,
        edges,
    }
}

/// A partial order on `nodes` nodes: each forward pair is ordered with
/// probability `density`.
pub fn random_partial_order<R: Rng>(rng: &mut R, domain: &PlanningDomain, nodes: usize, density: f64) -> PartialOrderPlan {
    let name = |i: usize| format!("n{}", i + 1);
    let mut before = Vec::new();
    for i in 0..nodes {
        for j in i + 1..nodes {
            if rng.random_bool(density) {
                before.push((name(i), name(j)));
            }
        }
    }
    PartialOrderPlan {
        nodes: (0..nodes)
            .map(|i| PlanStep {
                name: name(i),
                action: action(rng, domain),
            })
            .collect(),
        before,
    }
}

//! Looping plans as absorbing Markov chains over reachable (step, state)
//! pairs, solved exactly.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};

use super::{Diagnostics, EvaluationResult, ExpectedCount, Successors};
use crate::domain::{ActionId, PlanningDomain};
use crate::error::{Error, Result};
use crate::linsolve::{solve, SparseRow};
use crate::plans::{BoundController, LoopingPlan};
use crate::rational::Rational;
use crate::state::State;

/// Largest number of reachable product states handed to the solver.
pub const SOLVER_CAP: usize = 1 << 16;

struct Chain {
    /// `(step, state)` per node; node 0 is the start.
    nodes: Vec<(usize, State)>,
    edges: Vec<Vec<(usize, Rational)>>,
    /// One-step probability of entering the goal.
    goal: Vec<Rational>,
    /// One-step probability of stopping outside the goal (undefined step).
    halt: Vec<Rational>,
}

fn explore(domain: &PlanningDomain, bound: &BoundController, start: usize) -> Result<Chain> {
    let mut succ = Successors::new(domain);
    let mut index: HashMap<(usize, State), usize> = HashMap::new();
    let mut chain = Chain {
        nodes: vec![(start, domain.initial)],
        edges: Vec::new(),
        goal: Vec::new(),
        halt: Vec::new(),
    };
    index.insert((start, domain.initial), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (step, state) = chain.nodes[i];
        let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut goal = Rational::zero();
        let mut halt = Rational::zero();
        for (t, p) in succ.get(state, bound.actions[step])?.iter() {
            if succ.is_goal(*t) {
                goal += p;
                continue;
            }
            let Some(q) = bound.successor_step(step, *t) else {
                halt += p;
                continue;
            };
            let j = match index.get(&(q, *t)) {
                Some(&j) => j,
                None => {
                    let j = chain.nodes.len();
                    if j == SOLVER_CAP {
                        return Err(Error::CapExceeded {
                            what: "reachable product states",
                            count: j as u64 + 1,
                            cap: SOLVER_CAP as u64,
                        });
                    }
                    chain.nodes.push((q, *t));
                    index.insert((q, *t), j);
                    queue.push_back(j);
                    j
                }
            };
            *out.entry(j).or_insert_with(Rational::zero) += p;
        }
        // nodes are processed in creation order, so slot `i` is next
        debug_assert_eq!(chain.edges.len(), i);
        chain.edges.push(out.into_iter().collect());
        chain.goal.push(goal);
        chain.halt.push(halt);
    }
    Ok(chain)
}

/// Solves `y = c + P y` over the nodes where `keep` holds; other nodes count
/// as 0. Returns `y` at node 0 (0 if node 0 is dropped) and the pivot count.
fn solve_on(chain: &Chain, keep: &[bool], c: &[Rational]) -> Result<(Rational, usize)> {
    if !keep[0] {
        return Ok((Rational::zero(), 0));
    }
    let mut var = vec![usize::MAX; chain.nodes.len()];
    let mut order = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            var[i] = order.len();
            order.push(i);
        }
    }
    let rows: Vec<SparseRow> = order
        .iter()
        .map(|&i| {
            let mut diag = Rational::one();
            let mut row = Vec::new();
            for (j, p) in &chain.edges[i] {
                if *j == i {
                    diag -= p;
                } else if keep[*j] {
                    row.push((var[*j], -p.clone()));
                }
            }
            row.push((var[i], diag));
            row
        })
        .collect();
    let rhs: Vec<Rational> = order.iter().map(|&i| c[i].clone()).collect();
    let (x, stats) = solve(&rows, &rhs)?;
    Ok((x[0].clone(), stats.pivots))
}

pub(crate) fn controller_value(domain: &PlanningDomain, bound: &BoundController) -> Result<(Rational, Diagnostics)> {
    if domain.goal.eval(domain.initial) {
        return Ok((Rational::one(), Diagnostics::default()));
    }
    let Some(start) = bound.start else {
        return Ok((Rational::zero(), Diagnostics::default()));
    };
    let chain = explore(domain, bound, start)?;
    let n = chain.nodes.len();
    // nodes that can reach the goal, by backward search
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, out) in chain.edges.iter().enumerate() {
        for (j, _) in out {
            preds[*j].push(i);
        }
    }
    let mut keep: Vec<bool> = chain.goal.iter().map(|g| !g.is_zero()).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !keep[i] {
                keep[i] = true;
                stack.push(i);
            }
        }
    }
    let (value, pivots) = solve_on(&chain, &keep, &chain.goal)?;
    Ok((
        value,
        Diagnostics {
            reachable_states: n,
            pivots,
        },
    ))
}

/// Strongly connected components (iterative Tarjan); `comp[i]` is the
/// component id of node `i`.
fn components(edges: &[Vec<(usize, Rational)>]) -> Vec<usize> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos == 0 && index[v] == usize::MAX {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&(w, _)) = edges[v].get(*pos) {
                *pos += 1;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

pub(crate) fn expected_count(domain: &PlanningDomain, bound: &BoundController, target: ActionId) -> Result<ExpectedCount> {
    if domain.goal.eval(domain.initial) {
        return Ok(ExpectedCount::Finite(Rational::zero()));
    }
    let Some(start) = bound.start else {
        return Ok(ExpectedCount::Finite(Rational::zero()));
    };
    let chain = explore(domain, bound, start)?;
    let n = chain.nodes.len();
    let comp = components(&chain.edges);
    let count = comp.iter().max().map_or(0, |&c| c + 1);
    let mut closed = vec![true; count];
    for i in 0..n {
        let leaks = !chain.goal[i].is_zero() || !chain.halt[i].is_zero();
        if leaks || chain.edges[i].iter().any(|(j, _)| comp[*j] != comp[i]) {
            closed[comp[i]] = false;
        }
    }
    let runs = |i: usize| bound.actions[chain.nodes[i].0] == target;
    if (0..n).any(|i| closed[comp[i]] && runs(i)) {
        return Ok(ExpectedCount::Divergent);
    }
    let keep: Vec<bool> = (0..n).map(|i| !closed[comp[i]]).collect();
    let c: Vec<Rational> = (0..n)
        .map(|i| if runs(i) { Rational::one() } else { Rational::zero() })
        .collect();
    Ok(ExpectedCount::Finite(solve_on(&chain, &keep, &c)?.0))
}

/// Exact goal-reach probability of a looping controller.
pub fn eval_looping(domain: &PlanningDomain, plan: &LoopingPlan) -> Result<EvaluationResult> {
    let (value, d) = controller_value(domain, &plan.bind(domain, false)?)?;
    Ok(EvaluationResult::plain(value, d))
}

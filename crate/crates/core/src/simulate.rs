//! Monte Carlo execution of plans, used to cross-check the exact evaluators.
//!
//! Runs are split into fixed chunks, each with its own ChaCha stream, so the
//! count for a given seed does not depend on the thread count.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{ActionId, PlanningDomain};
use crate::error::Result;
use crate::plans::{linear_extension_orders, BoundController, Plan, EXTENSION_CAP};
use crate::rational::Rational;
use crate::state::State;

const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarlo {
    pub runs: u64,
    pub successes: u64,
}

impl MonteCarlo {
    pub fn frequency(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.successes as f64 / self.runs as f64
        }
    }

    /// Whether the observed frequency lies within `sigmas` binomial standard
    /// deviations of `exact`.
    pub fn agrees_with(&self, exact: &Rational, sigmas: f64) -> bool {
        let p = exact.to_f64().unwrap_or(f64::NAN);
        let sd = (p * (1.0 - p) / self.runs as f64).sqrt();
        // a tiny floor keeps p = 0 or 1 from demanding bit-exact agreement
        (self.frequency() - p).abs() <= sigmas * sd + 1e-12
    }
}

/// Cumulative successor tables, filled lazily per worker.
struct Sampler<'a> {
    domain: &'a PlanningDomain,
    table: HashMap<(State, ActionId), Vec<(State, f64)>>,
}

impl Sampler<'_> {
    fn step(&mut self, rng: &mut ChaCha8Rng, state: State, action: ActionId) -> Result<State> {
        if !self.table.contains_key(&(state, action)) {
            let mut acc = 0.0;
            let cumulative = self
                .domain
                .successors(state, action)?
                .into_iter()
                .map(|(t, p)| {
                    acc += p.to_f64().unwrap_or(0.0);
                    (t, acc)
                })
                .collect();
            self.table.insert((state, action), cumulative);
        }
        let row = &self.table[&(state, action)];
        let u: f64 = rng.random::<f64>() * row.last().map_or(1.0, |r| r.1);
        Ok(row.iter().find(|(_, c)| u < *c).unwrap_or(row.last().expect("distribution is non-empty")).0)
    }
}

fn run_once(sampler: &mut Sampler, rng: &mut ChaCha8Rng, plan: &BoundController, max_steps: usize) -> Result<bool> {
    let domain = sampler.domain;
    let mut s = domain.initial;
    if domain.goal.eval(s) {
        return Ok(true);
    }
    let mut q = plan.start;
    for _ in 0..max_steps {
        let Some(step) = q else { return Ok(false) };
        s = sampler.step(rng, s, plan.actions[step])?;
        if domain.goal.eval(s) {
            return Ok(true);
        }
        q = plan.successor_step(step, s);
    }
    Ok(false)
}

/// Samples `runs` executions of `plan`, each cut off after `max_steps`
/// actions. Partially ordered plans draw a uniformly random linear extension
/// per run, matching the average interpretation.
pub fn simulate_plan(domain: &PlanningDomain, plan: &Plan, runs: u64, seed: u64, max_steps: usize) -> Result<MonteCarlo> {
    let controllers: Vec<BoundController> = match plan {
        Plan::TotalOrder(p) => vec![BoundController::chain(&p.bind(domain)?)],
        Plan::Acyclic(p) => vec![p.bind(domain, true)?],
        Plan::Looping(p) => vec![p.bind(domain, false)?],
        Plan::PartialOrder(p) => {
            let actions = p.bind(domain)?;
            linear_extension_orders(p, EXTENSION_CAP)?
                .iter()
                .map(|o| BoundController::chain(&o.iter().map(|&n| actions[n]).collect::<Vec<_>>()))
                .collect()
        }
    };
    let chunks = runs.div_ceil(CHUNK);
    let counts = crate::par::map_range(chunks as usize, |c| -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let mut sampler = Sampler {
            domain,
            table: HashMap::new(),
        };
        let n = CHUNK.min(runs - c as u64 * CHUNK);
        let mut hits = 0;
        for _ in 0..n {
            let pick = if controllers.len() == 1 { 0 } else { rng.random_range(0..controllers.len()) };
            if run_once(&mut sampler, &mut rng, &controllers[pick], max_steps)? {
                hits += 1;
            }
        }
        Ok(hits)
    });
    let mut successes = 0;
    for c in counts {
        successes += c?;
    }
    Ok(MonteCarlo { runs, successes })
}

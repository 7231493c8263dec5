//! Instance generators for the MAJSAT and Turing-machine constructions, with
//! the brute-force oracles that certify them.

mod tm;

pub use tm::{simulate_tm, tm_to_instance, Move, Rule, TmOutcome, TuringMachineSpec, TM_ACTION};

use sha2::{Digest, Sha256};

use crate::circuit::CircuitBuilder;
use crate::domain::{Backend, PlanningDomain};
use crate::dsl::{print_dimacs, CnfFormula};
use crate::error::{Error, Result};
use crate::formula::Condition;
use crate::plans::{Plan, TotalOrderPlan};
use crate::rational::{ratio, Rational};
use crate::state::State;

/// Largest variable count accepted by [`count_satisfying`].
pub const COUNT_CAP: usize = 24;

/// Name of the single action in generated MAJSAT domains.
pub const MAJSAT_ACTION: &str = "a";

/// A generated decision instance: does `plan` reach the goal of `domain` with
/// probability at least `threshold`?
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionInstance {
    pub domain: PlanningDomain,
    pub plan: Plan,
    /// An equivalent plan of another class, emitted for cross-checking.
    pub alternate: Option<Plan>,
    pub threshold: Rational,
    /// Hex SHA-256 of the printed source formula or machine and input.
    pub provenance: String,
}

pub(crate) fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Number of satisfying assignments, by exhaustive enumeration.
pub fn count_satisfying(formula: &CnfFormula) -> Result<u64> {
    let n = formula.num_vars;
    if n > COUNT_CAP {
        return Err(Error::CapExceeded {
            what: "model counting variable count",
            count: n as u64,
            cap: COUNT_CAP as u64,
        });
    }
    Ok(crate::par::count_range(1u64 << n, |a| formula.satisfied_by(a)))
}

/// Builds the two-step MAJSAT instance. Variables are a two-bit phase tag
/// (`phase0 phase1`: 00 start, 10 assignment, 01 accept, 11 reject) followed
/// by `x1..xn`. From the start state the action picks an assignment uniformly;
/// from an assignment it moves to accept or reject and clears the `x` bits;
/// accept and reject are absorbing.
pub fn majsat_to_instance(formula: &CnfFormula) -> Result<ReductionInstance> {
    let n = formula.num_vars;
    if n == 0 {
        return Err(Error::Unsupported("the MAJSAT construction needs at least one variable".into()));
    }
    let width = n + 2;
    if width > crate::domain::ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "MAJSAT domain variable count",
            count: width as u64,
            cap: crate::domain::ENUMERATION_CAP as u64,
        });
    }
    let mut variables = vec!["phase0".to_string(), "phase1".to_string()];
    variables.extend((1..=n).map(|i| format!("x{i}")));

    let mut b = CircuitBuilder::new(width, width);
    let (b0, b1) = (b.before(0), b.before(1));
    let (a0, a1) = (b.after(0), b.after(1));
    let (nb0, nb1, na1) = (b.not(b0), b.not(b1), b.not(a1));

    let at_start = b.and(&[nb0, nb1]);
    let into_assignment = b.and(&[a0, na1]);
    let pick = b.and(&[at_start, into_assignment]);

    let clauses: Vec<usize> = formula
        .clauses
        .iter()
        .map(|clause| {
            let lits: Vec<usize> = clause
                .iter()
                .map(|&lit| {
                    let x = b.before(1 + lit.unsigned_abs() as usize);
                    if lit > 0 {
                        x
                    } else {
                        b.not(x)
                    }
                })
                .collect();
            b.or(&lits)
        })
        .collect();
    let sat = b.and(&clauses);
    let unsat = b.not(sat);
    let at_assignment = b.and(&[b0, nb1]);
    // accept tag 01, reject tag 11: phase1 always set, phase0 iff unsat
    let tag0 = b.equiv(a0, unsat);
    let mut decide = vec![at_assignment, tag0, a1];
    for i in 0..n {
        let x = b.after(2 + i);
        decide.push(b.not(x));
    }
    let decide = b.and(&decide);

    let mut same = vec![b1];
    for v in 0..width {
        let (x, y) = (b.before(v), b.after(v));
        same.push(b.equiv(x, y));
    }
    let absorb = b.and(&same);
    let unit = b.or(&[decide, absorb]);

    let zero = b.constant(false);
    let mut value = vec![zero; n + 1];
    value[0] = pick;
    value[n] = unit;
    let circuit = b.finish(MAJSAT_ACTION, &value, n);

    let goal = Condition::And(vec![Condition::Not(Box::new(Condition::Var(0))), Condition::Var(1)]);
    let domain = PlanningDomain::new(
        "majsat",
        variables,
        State::zeros(width),
        goal,
        vec![MAJSAT_ACTION.to_string()],
        Backend::Circuit(vec![circuit]),
    )?;
    let plan = TotalOrderPlan::new([MAJSAT_ACTION, MAJSAT_ACTION]);
    Ok(ReductionInstance {
        domain,
        alternate: Some(Plan::Acyclic(plan.to_chain_controller())),
        plan: Plan::TotalOrder(plan),
        threshold: ratio(1, 2),
        provenance: digest(&print_dimacs(formula)),
    })
}

//! PSO operators to transition circuits.
//!
//! For each operator the circuit computes, for a `(before, after)` pair, the
//! sum of the probabilities of those outcomes of the firing case whose effect
//! maps `before` to `after`. Probabilities are fixed point over `2^m` where
//! `m` is the largest dyadic exponent among the operator's outcomes.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::circuit::{CircuitBuilder, TransitionCircuit, Wire};
use crate::domain::{Backend, PlanningDomain, PsoOperator};
use crate::error::{Error, Result};
use crate::formula::{Condition, Expr};
use crate::rational::{dyadic_exponent, format_exact, Rational};

pub(crate) fn compile_condition(b: &mut CircuitBuilder, condition: &Condition) -> Wire {
    match condition {
        Expr::True => b.constant(true),
        Expr::False => b.constant(false),
        Expr::Var(i) => b.before(*i),
        Expr::Not(inner) => {
            let w = compile_condition(b, inner);
            b.not(w)
        }
        Expr::And(xs) => {
            let ws: Vec<Wire> = xs.iter().map(|x| compile_condition(b, x)).collect();
            b.and(&ws)
        }
        Expr::Or(xs) => {
            let ws: Vec<Wire> = xs.iter().map(|x| compile_condition(b, x)).collect();
            b.or(&ws)
        }
    }
}

/// Compiles one operator over a `width`-variable state space.
pub fn compile_operator(op: &PsoOperator, width: usize) -> Result<TransitionCircuit> {
    let mut m: u32 = 1;
    for (ci, case) in op.cases.iter().enumerate() {
        for (oi, o) in case.outcomes.iter().enumerate() {
            let k = dyadic_exponent(&o.probability).ok_or_else(|| Error::NonDyadic {
                outcome: format!("{} case {} outcome {}", op.name, ci + 1, oi + 1),
                probability: format_exact(&o.probability),
            })?;
            m = m.max(k);
        }
    }
    let m = m as usize;
    let mut b = CircuitBuilder::new(width, width);
    let zero = b.constant(false);
    let mut total: Vec<Wire> = vec![zero; m + 1];
    let mut earlier: Vec<Wire> = Vec::new();
    for case in &op.cases {
        let cond = compile_condition(&mut b, &case.condition);
        let blocked: Vec<Wire> = earlier.iter().map(|&w| b.not(w)).collect();
        let mut fire_inputs = blocked;
        fire_inputs.push(cond);
        let fire = b.and(&fire_inputs);
        earlier.push(cond);
        for outcome in &case.outcomes {
            if outcome.probability.is_zero() {
                continue;
            }
            let mut eqs = vec![fire];
            for v in 0..width {
                let target = match outcome.effect.0.iter().find(|&&(i, _)| i == v) {
                    Some(&(_, value)) => b.constant(value),
                    None => b.before(v),
                };
                let after = b.after(v);
                eqs.push(b.equiv(after, target));
            }
            let matched = b.and(&eqs);
            // numerator over 2^m, little-endian
            let numer = (&outcome.probability * Rational::from_integer(BigInt::one() << m)).to_integer();
            let term: Vec<Wire> = (0..=m)
                .map(|bit| if numer.bit(bit as u64) { matched } else { zero })
                .collect();
            total = b.add(&total, &term);
        }
    }
    Ok(b.finish(op.name.clone(), &total, m))
}

/// Converts a PSO-backed domain to an equivalent circuit-backed one.
pub fn compile_pso_to_circuit(domain: &PlanningDomain) -> Result<PlanningDomain> {
    let Backend::Pso(ops) = &domain.backend else {
        return Err(Error::Unsupported(format!(
            "compile_pso_to_circuit needs a PSO domain, got a {} domain",
            domain.backend.kind()
        )));
    };
    let circuits = ops
        .iter()
        .map(|op| compile_operator(op, domain.width()))
        .collect::<Result<Vec<_>>>()?;
    PlanningDomain::new(
        domain.name.clone(),
        domain.variables.clone(),
        domain.initial,
        domain.goal.clone(),
        domain.actions.clone(),
        Backend::Circuit(circuits),
    )
}

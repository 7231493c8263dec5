use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use super::{propagate::sequence_value, Diagnostics, EvaluationResult};
use crate::domain::{ActionId, PlanningDomain};
use crate::error::Result;
use crate::plans::{linear_extension_orders, PartialOrderPlan, TotalOrderPlan, EXTENSION_CAP};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interpretation {
    Optimistic,
    Pessimistic,
    Average,
}

impl FromStr for Interpretation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "optimistic" => Ok(Interpretation::Optimistic),
            "pessimistic" => Ok(Interpretation::Pessimistic),
            "average" => Ok(Interpretation::Average),
            other => Err(format!("unknown interpretation `{other}`; expected optimistic, pessimistic or average")),
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpretation::Optimistic => "optimistic",
            Interpretation::Pessimistic => "pessimistic",
            Interpretation::Average => "average",
        })
    }
}

/// Evaluates every linear extension and combines the values. Extensions that
/// induce the same action sequence are evaluated once but counted with
/// multiplicity. Ties go to the first extension in canonical order.
pub fn eval_partial(domain: &PlanningDomain, plan: &PartialOrderPlan, interpretation: Interpretation) -> Result<EvaluationResult> {
    let actions = plan.bind(domain)?;
    let orders = linear_extension_orders(plan, EXTENSION_CAP)?;
    let sequences: Vec<Vec<ActionId>> = orders
        .iter()
        .map(|o| o.iter().map(|&n| actions[n]).collect())
        .collect();
    let mut distinct: Vec<&[ActionId]> = Vec::new();
    let mut slot: HashMap<&[ActionId], usize> = HashMap::new();
    let which: Vec<usize> = sequences
        .iter()
        .map(|s| {
            *slot.entry(s.as_slice()).or_insert_with(|| {
                distinct.push(s.as_slice());
                distinct.len() - 1
            })
        })
        .collect();
    let results = crate::par::map(&distinct, |s| sequence_value(domain, s));
    let mut values = Vec::with_capacity(results.len());
    let mut diagnostics = Diagnostics::default();
    for r in results {
        let (v, d) = r?;
        diagnostics.reachable_states += d.reachable_states;
        values.push(v);
    }
    let value_of = |i: usize| &values[which[i]];

    let pick = |better: &dyn Fn(&Rational, &Rational) -> bool| {
        let mut best = 0;
        for i in 1..sequences.len() {
            if better(value_of(i), value_of(best)) {
                best = i;
            }
        }
        best
    };
    let witness = |i: usize| TotalOrderPlan {
        steps: orders[i].iter().map(|&n| plan.nodes[n].action.clone()).collect(),
    };
    Ok(match interpretation {
        Interpretation::Optimistic => {
            let i = pick(&|a, b| a > b);
            EvaluationResult {
                value: value_of(i).clone(),
                witness: Some(witness(i)),
                diagnostics,
            }
        }
        Interpretation::Pessimistic => {
            let i = pick(&|a, b| a < b);
            EvaluationResult {
                value: value_of(i).clone(),
                witness: Some(witness(i)),
                diagnostics,
            }
        }
        Interpretation::Average => {
            let total = (0..sequences.len()).fold(Rational::zero(), |acc, i| acc + value_of(i));
            EvaluationResult {
                value: total / Rational::from_integer(sequences.len().into()),
                witness: None,
                diagnostics,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::eval::eval_total_order;
    use crate::plans::Plan;
    use crate::rational::ratio;

    fn fig2c() -> PartialOrderPlan {
        match bundled::fig2c() {
            Plan::PartialOrder(p) => p,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fig2c_interpretations() {
        let d = bundled::sandcastle();
        let p = fig2c();
        let opt = eval_partial(&d, &p, Interpretation::Optimistic).unwrap();
        let pes = eval_partial(&d, &p, Interpretation::Pessimistic).unwrap();
        let avg = eval_partial(&d, &p, Interpretation::Average).unwrap();
        assert_eq!(opt.value, ratio(43, 64));
        assert_eq!(pes.value, ratio(21, 32));
        assert_eq!(avg.value, ratio(85, 128));
        assert_eq!(
            opt.witness.unwrap(),
            TotalOrderPlan::new(["dig-moat", "dig-moat", "erect-castle", "dig-moat", "erect-castle"])
        );
        assert_eq!(
            pes.witness.unwrap(),
            TotalOrderPlan::new(["dig-moat", "dig-moat", "dig-moat", "erect-castle", "erect-castle"])
        );
        assert!(avg.witness.is_none());
    }

    #[test]
    fn chain_interpretations_agree() {
        let d = bundled::sandcastle();
        let t = TotalOrderPlan::new(["dig-moat", "erect-castle", "erect-castle"]);
        let expected = eval_total_order(&d, &t).unwrap().value;
        for i in [Interpretation::Optimistic, Interpretation::Pessimistic, Interpretation::Average] {
            assert_eq!(eval_partial(&d, &t.to_chain_partial(), i).unwrap().value, expected);
        }
    }

    #[test]
    fn duplicates_count_with_multiplicity() {
        // two interchangeable digs then an erect: 2 extensions, one sequence
        let d = bundled::sandcastle();
        let p = PartialOrderPlan {
            nodes: vec![
                crate::plans::PlanStep { name: "a".into(), action: "dig-moat".into() },
                crate::plans::PlanStep { name: "b".into(), action: "dig-moat".into() },
                crate::plans::PlanStep { name: "c".into(), action: "erect-castle".into() },
            ],
            before: vec![("a".into(), "c".into()), ("b".into(), "c".into())],
        };
        assert_eq!(eval_partial(&d, &p, Interpretation::Average).unwrap().value, ratio(7, 16));
    }

    #[test]
    fn interpretation_names() {
        assert_eq!("pessimistic".parse::<Interpretation>().unwrap(), Interpretation::Pessimistic);
        assert!("median".parse::<Interpretation>().is_err());
        assert_eq!(Interpretation::Average.to_string(), "average");
    }
}

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ppeval::circuit::{validate_circuit, Gate, GateKind, TransitionCircuit};
use ppeval::dsl::{compile_pso_to_circuit, parse_domain, parse_plan, print_domain, print_plan};
use ppeval::eval::{eval_acyclic, eval_looping, eval_looping_truncated, eval_total_order};
use ppeval::plans::{linear_extensions, PartialOrderPlan, PlanStep, TotalOrderPlan};
use ppeval::rational::{dyadic_exponent, ratio};
use ppeval::search::{exists_acyclic, exists_looping, exists_total_order, SearchBudget};
use ppeval::{bundled, synth, Backend};
use ppeval::{eval_plan, Interpretation, Plan, PlanningDomain, Rational, State};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dag(k: usize, mask: u64) -> PartialOrderPlan {
    let mut before = Vec::new();
    let mut bit = 0;
    for i in 0..k {
        for j in i + 1..k {
            if (mask >> bit) & 1 == 1 {
                before.push((format!("n{i}"), format!("n{j}")));
            }
            bit += 1;
        }
    }
    PartialOrderPlan {
        nodes: (0..k)
            .map(|i| PlanStep {
                name: format!("n{i}"),
                action: if i % 2 == 0 { "dig-moat" } else { "erect-castle" }.into(),
            })
            .collect(),
        before,
    }
}

/// All orderings of `0..k` consistent with the precedence pairs, by brute force.
fn permutations_respecting(k: usize, before: &[(usize, usize)]) -> Vec<Vec<usize>> {
    fn go(k: usize, before: &[(usize, usize)], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            let pos = |n: usize| prefix.iter().position(|&x| x == n).unwrap();
            if before.iter().all(|&(a, b)| pos(a) < pos(b)) {
                out.push(prefix.clone());
            }
            return;
        }
        for n in 0..k {
            if !prefix.contains(&n) {
                prefix.push(n);
                go(k, before, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(k, before, &mut Vec::new(), &mut out);
    out
}

fn index_pairs(p: &PartialOrderPlan) -> Vec<(usize, usize)> {
    let idx = |n: &str| p.nodes.iter().position(|x| x.name == n).unwrap();
    p.before.iter().map(|(a, b)| (idx(a), idx(b))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extension_count_matches_brute_force(k in 1usize..=8, mask in any::<u64>()) {
        let p = dag(k, mask);
        let brute = permutations_respecting(k, &index_pairs(&p));
        let got = linear_extensions(&p).unwrap();
        prop_assert_eq!(got.len(), brute.len());
        let distinct: HashSet<_> = got.iter().map(|t| t.steps.clone()).collect();
        let want: HashSet<_> = brute
            .iter()
            .map(|o| o.iter().map(|&n| p.nodes[n].action.clone()).collect::<Vec<_>>())
            .collect();
        prop_assert_eq!(distinct, want);
    }

    #[test]
    fn average_matches_permutation_brute_force(k in 1usize..=6, mask in any::<u64>()) {
        let d = bundled::sandcastle();
        let p = dag(k, mask);
        let brute = permutations_respecting(k, &index_pairs(&p));
        let mut total = Rational::zero();
        for o in &brute {
            let t = TotalOrderPlan { steps: o.iter().map(|&n| p.nodes[n].action.clone()).collect() };
            total += eval_total_order(&d, &t).unwrap().value;
        }
        let mean = total / Rational::from_integer(brute.len().into());
        let plan = Plan::PartialOrder(p);
        let avg = eval_plan(&d, &plan, Interpretation::Average).unwrap().value;
        prop_assert_eq!(&avg, &mean);
        let lo = eval_plan(&d, &plan, Interpretation::Pessimistic).unwrap().value;
        let hi = eval_plan(&d, &plan, Interpretation::Optimistic).unwrap().value;
        prop_assert!(lo <= avg && avg <= hi);
        if brute.len() == 1 {
            prop_assert!(lo == hi);
        }
    }

    #[test]
    fn values_are_probabilities(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = synth::random_domain(&mut r, 3, 2);
        let plans = [
            Plan::TotalOrder(synth::random_total_order(&mut r, &d, 4)),
            Plan::Acyclic(synth::random_controller(&mut r, &d, 3, true)),
            Plan::Looping(synth::random_controller(&mut r, &d, 3, false)),
            Plan::PartialOrder(synth::random_partial_order(&mut r, &d, 4, 0.4)),
        ];
        for p in &plans {
            for i in [Interpretation::Optimistic, Interpretation::Pessimistic, Interpretation::Average] {
                let v = eval_plan(&d, p, i).unwrap().value;
                prop_assert!(v >= Rational::zero() && v <= Rational::one());
            }
        }
    }

    #[test]
    fn truncation_is_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = synth::random_domain(&mut r, 3, 2);
        let p = synth::random_controller(&mut r, &d, 3, false);
        let full = eval_looping(&d, &p).unwrap().value;
        let mut last = Rational::zero();
        for h in 0..12 {
            let v = eval_looping_truncated(&d, &p, h).unwrap().value;
            prop_assert!(v >= last && v <= full);
            last = v;
        }
    }

    #[test]
    fn printed_instances_reparse(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = synth::random_domain(&mut r, 3, 2);
        prop_assert_eq!(&parse_domain(&print_domain(&d).unwrap()).unwrap(), &d);
        for p in [
            Plan::TotalOrder(synth::random_total_order(&mut r, &d, 3)),
            Plan::Acyclic(synth::random_controller(&mut r, &d, 3, true)),
            Plan::Looping(synth::random_controller(&mut r, &d, 3, false)),
            Plan::PartialOrder(synth::random_partial_order(&mut r, &d, 4, 0.4)),
        ] {
            prop_assert_eq!(&parse_plan(&print_plan(&p)).unwrap(), &p);
        }
    }

    #[test]
    fn compiled_circuits_are_dyadic_and_stochastic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let d = synth::random_domain(&mut r, 3, 2);
        let c = compile_pso_to_circuit(&d).unwrap();
        let Backend::Circuit(circuits) = &c.backend else { unreachable!() };
        for circuit in circuits {
            let m = circuit.fraction_bits() as u32;
            for s in State::all(3) {
                let mut total = Rational::zero();
                for t in State::all(3) {
                    let p = circuit.eval(s, t).unwrap();
                    prop_assert!(dyadic_exponent(&p).is_some_and(|e| e <= m));
                    total += p;
                }
                prop_assert_eq!(total, Rational::one());
            }
        }
    }
}

fn search_agrees(d: &PlanningDomain, k: usize, theta: Rational) {
    let pruned = exists_total_order(d, &SearchBudget::new(k, theta.clone())).unwrap();
    let brute = exists_total_order(d, &SearchBudget { prune: false, ..SearchBudget::new(k, theta.clone()) }).unwrap();
    assert_eq!(pruned.found, brute.found);
    assert_eq!(pruned.witness, brute.witness);
    assert_eq!(pruned.best.is_some(), brute.best.is_some());
    if !brute.found {
        assert_eq!(pruned.best, brute.best);
    }
    if let Some(w) = &brute.witness {
        assert!(eval_plan(d, w, Interpretation::Average).unwrap().value >= theta);
    }
}

#[test]
fn total_order_search_is_complete_at_desk_scale() {
    let mut r = rng(5);
    for i in 0..30 {
        let actions = 1 + i % 3;
        let d = synth::random_domain(&mut r, 3 + i % 2, actions);
        for k in [2, 5] {
            for theta in [ratio(1, 4), ratio(1, 2), ratio(7, 8)] {
                search_agrees(&d, k, theta);
            }
        }
    }
}

#[test]
fn controller_search_witnesses_are_sound() {
    let mut r = rng(9);
    for _ in 0..10 {
        let d = synth::random_domain(&mut r, 3, 2);
        let (labels, obs) = synth::random_observations(&mut r, &d);
        for theta in [ratio(1, 4), ratio(3, 4)] {
            let budget = SearchBudget::new(2, theta.clone());
            let a = exists_acyclic(&d, &budget, &labels, &obs).unwrap();
            let b = exists_acyclic(&d, &SearchBudget { prune: false, ..budget.clone() }, &labels, &obs).unwrap();
            assert_eq!(a.witness, b.witness);
            if !a.found {
                assert_eq!(a.best, b.best);
            }
            let l = exists_looping(&d, &budget, &labels, &obs).unwrap();
            // a looping search covers every acyclic controller
            assert!(!a.found || l.found);
            for out in [&a, &l] {
                if let Some(w) = &out.witness {
                    let v = eval_plan(&d, w, Interpretation::Average).unwrap().value;
                    assert!(v >= theta);
                    assert_eq!(Some(v), out.value);
                }
            }
        }
    }
}

#[test]
fn unreachable_goal_is_never_found() {
    let mut d = bundled::sandcastle();
    d.goal = ppeval::formula::Condition::False;
    let (labels, obs) = bundled::moat_observations();
    let budget = SearchBudget::new(3, ratio(1, 100));
    assert!(!exists_total_order(&d, &budget).unwrap().found);
    assert!(!exists_acyclic(&d, &budget, &labels, &obs).unwrap().found);
    assert!(!exists_looping(&d, &budget, &labels, &obs).unwrap().found);
}

#[test]
fn chain_embeddings_preserve_values() {
    let d = bundled::sandcastle();
    let t = TotalOrderPlan::new(["dig-moat", "erect-castle", "dig-moat", "erect-castle"]);
    let v = eval_total_order(&d, &t).unwrap().value;
    assert_eq!(eval_acyclic(&d, &t.to_chain_controller()).unwrap().value, v);
    assert_eq!(eval_looping(&d, &t.to_chain_controller()).unwrap().value, v);
    assert_eq!(linear_extensions(&t.to_chain_partial()).unwrap(), vec![t]);
}

/// A chain of alternating XOR and AND gates, each reading the previous gate
/// and one input bit, so nothing can be shared or folded.
fn long_circuit(gates: usize, width: usize) -> TransitionCircuit {
    let mut g: Vec<Gate> = (0..width)
        .map(|i| Gate::new(GateKind::InputBefore(i), vec![]))
        .chain((0..width).map(|i| Gate::new(GateKind::InputAfter(i), vec![])))
        .collect();
    while g.len() < gates {
        let prev = g.len() - 1;
        let input = g.len() % (2 * width);
        let kind = if g.len().is_multiple_of(2) { GateKind::Xor } else { GateKind::Or };
        g.push(Gate::new(kind, vec![input, prev]));
    }
    let last = g.len() - 1;
    TransitionCircuit {
        name: "long".into(),
        before_width: width,
        after_width: width,
        gates: g,
        unit: None,
        output_bits: vec![last],
    }
}

#[test]
fn large_circuit_evaluates_within_budget() {
    let c = long_circuit(100_000, 8);
    assert!(validate_circuit(&c).ok());
    assert_eq!(c.gates.len(), 100_000);
    let start = Instant::now();
    for bits in 0..16u64 {
        let v = c.eval(State::new(bits, 8), State::new(bits * 7 % 256, 8)).unwrap();
        assert!(v.is_zero() || v == ratio(1, 2));
    }
    let spent = start.elapsed();
    // linear in gates: 16 passes over 10^5 gates is well under a second
    assert!(spent < Duration::from_secs(3), "{spent:?}");
}

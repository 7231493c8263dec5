//! Acceptance suite. Runs every criterion, prints one pass/fail line each,
//! and exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppeval::dsl::{
    compile_pso_to_circuit, parse_circuit, parse_dimacs, parse_domain, parse_machine, parse_observations, parse_plan,
    print_circuit, print_dimacs, print_domain, print_machine, print_observations, print_plan,
};
use ppeval::eval::{eval_acyclic, eval_looping, eval_total_order, expected_action_count, ExpectedCount};
use ppeval::plans::{linear_extensions, TotalOrderPlan};
use ppeval::rational::{one, ratio};
use ppeval::reductions::{count_satisfying, majsat_to_instance, simulate_tm, tm_to_instance, TmOutcome};
use ppeval::search::{exists_total_order, optimal_value_bound, SearchBudget};
use ppeval::simulate::simulate_plan;
use ppeval::{bundled, synth, validate_domain, validate_plan};
use ppeval::{eval_plan, meets_threshold, Interpretation, Plan, PlanningDomain, Rational, State};

type Check = std::result::Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn controller(plan: Plan) -> ppeval::plans::ControllerPlan {
    match plan {
        Plan::Acyclic(c) | Plan::Looping(c) => c,
        other => panic!("not a controller: {other:?}"),
    }
}

fn partial(plan: Plan) -> ppeval::plans::PartialOrderPlan {
    match plan {
        Plan::PartialOrder(p) => p,
        other => panic!("not a partial order: {other:?}"),
    }
}

fn timed(limit: Duration, what: &str, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    f()?;
    ensure!(start.elapsed() < limit, "{what} took {:?}, limit {:?}", start.elapsed(), limit);
    Ok(())
}

fn worked_values() -> Check {
    let d = bundled::sandcastle();
    let second = Duration::from_secs(1);
    timed(second, "total order", || {
        let Plan::TotalOrder(p) = bundled::fig2a() else { unreachable!() };
        let v = ok(eval_total_order(&d, &p))?.value;
        ensure!(v == ratio(7, 16), "2(a) = {v}");
        Ok(())
    })?;
    timed(second, "acyclic", || {
        let v = ok(eval_acyclic(&d, &controller(bundled::fig2b())))?.value;
        ensure!(v == ratio(15, 32), "2(b) = {v}");
        let c = ok(expected_action_count(&d, &bundled::fig2b(), "dig-moat"))?;
        ensure!(c == ExpectedCount::Finite(ratio(7, 4)), "2(b) digs = {c:?}");
        Ok(())
    })?;
    timed(second, "looping", || {
        let v = ok(eval_looping(&d, &controller(bundled::fig2d())))?.value;
        ensure!(v == one(), "2(d) = {v}");
        Ok(())
    })?;
    timed(second, "extensions", || {
        let mut got = ok(linear_extensions(&partial(bundled::fig2c())))?;
        got.sort_by(|a, b| a.steps.cmp(&b.steps));
        let want = vec![
            TotalOrderPlan::new(["dig-moat", "dig-moat", "dig-moat", "erect-castle", "erect-castle"]),
            TotalOrderPlan::new(["dig-moat", "dig-moat", "erect-castle", "dig-moat", "erect-castle"]),
        ];
        ensure!(got == want, "2(c) extensions {got:?}");
        Ok(())
    })
}

fn interpretations() -> Check {
    let d = bundled::sandcastle();
    let p = bundled::fig2c();
    let value = |i| ok(eval_plan(&d, &p, i)).map(|r| r.value);
    let (o, pe, a) = (
        value(Interpretation::Optimistic)?,
        value(Interpretation::Pessimistic)?,
        value(Interpretation::Average)?,
    );
    ensure!(o == ratio(43, 64), "optimistic {o}");
    ensure!(pe == ratio(21, 32), "pessimistic {pe}");
    ensure!(a == ratio(85, 128), "average {a}");
    ensure!(pe <= a && a <= o, "ordering {pe} {a} {o}");
    // the oracle: each extension evaluated on its own
    let mut each: Vec<Rational> = Vec::new();
    for t in ok(linear_extensions(&partial(p.clone())))? {
        each.push(ok(eval_total_order(&d, &t))?.value);
    }
    let max = each.iter().max().unwrap().clone();
    let min = each.iter().min().unwrap().clone();
    let mean = each.iter().fold(Rational::zero(), |s, v| s + v) / Rational::from_integer(each.len().into());
    ensure!(o == max && pe == min && a == mean, "oracle {max} {min} {mean}");
    Ok(())
}

fn majsat() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3A5A7);
    for i in 0..200 {
        let n = rng.random_range(1..=10);
        let m = rng.random_range(0..=2 * n);
        let f = synth::random_cnf(&mut rng, n, m);
        let inst = ok(majsat_to_instance(&f))?;
        let count = ok(count_satisfying(&f))?;
        let exact = Rational::new(count.into(), (1u64 << n).into());
        let v = ok(eval_plan(&inst.domain, &inst.plan, Interpretation::Average))?.value;
        ensure!(v == exact, "formula {i}: value {v}, models {count}/2^{n}");
        if let Some(alt) = &inst.alternate {
            let w = ok(eval_plan(&inst.domain, alt, Interpretation::Average))?.value;
            ensure!(w == exact, "formula {i}: alternate plan {w}");
        }
        let majority = 2 * count >= 1u64 << n;
        ensure!(meets_threshold(&v, &inst.threshold) == majority, "formula {i}: verdict");
    }
    ensure!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
    Ok(())
}

fn turing_machines() -> Check {
    let inputs: &[(&str, &[&str])] = &[
        ("accept", &[""]),
        ("reject", &[""]),
        ("parity", &["", "1", "11", "101", "011", "111"]),
        ("increment", &["$", "$1", "$11", "$111"]),
        ("countdown", &["", "1", "11", "1111", "10", "0"]),
        ("loop", &[""]),
    ];
    let machines = bundled::machines();
    for (name, xs) in inputs {
        let (_, m) = machines.iter().find(|(n, _)| n == name).unwrap();
        for x in *xs {
            let accepted = matches!(ok(simulate_tm(m, x, 10_000))?, TmOutcome::Accept { .. });
            let inst = ok(tm_to_instance(m, x))?;
            let v = ok(eval_plan(&inst.domain, &inst.plan, Interpretation::Average))?.value;
            let want = if accepted { one() } else { Rational::zero() };
            ensure!(v == want, "{name} on {x:?}: value {v}, simulation accepted = {accepted}");
        }
    }
    Ok(())
}

fn search() -> Check {
    let d = bundled::sandcastle();
    let out = ok(exists_total_order(&d, &SearchBudget::new(3, ratio(37, 64))))?;
    ensure!(
        out.found && out.witness == Some(Plan::TotalOrder(TotalOrderPlan::new(["erect-castle"; 3]))),
        "sand-castle witness {:?}",
        out.witness
    );
    let out = ok(exists_total_order(&d, &SearchBudget::new(3, ratio(3, 5))))?;
    ensure!(!out.found && out.exhausted && out.best == Some(ratio(37, 64)), "sand-castle max {:?}", out.best);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EA2C4);
    for i in 0..50 {
        let dom = synth::random_domain(&mut rng, 3, 2);
        let k = 1 + i % 4;
        let theta = ratio(rng.random_range(1..=16), 16);
        let pruned = ok(exists_total_order(&dom, &SearchBudget::new(k, theta.clone())))?;
        let brute = ok(exists_total_order(&dom, &SearchBudget { prune: false, ..SearchBudget::new(k, theta.clone()) }))?;
        ensure!(pruned.found == brute.found, "domain {i}: found {} vs {}", pruned.found, brute.found);
        ensure!(pruned.value == brute.value, "domain {i}: witness values differ");
        ensure!(pruned.nodes <= brute.nodes, "domain {i}: pruning visited more nodes");
        if brute.found {
            let w = brute.witness.as_ref().unwrap();
            let v = ok(eval_plan(&dom, w, Interpretation::Average))?.value;
            ensure!(Some(&v) == brute.value.as_ref() && v >= theta, "domain {i}: witness value");
        } else {
            ensure!(pruned.best == brute.best, "domain {i}: maxima differ");
        }
        // admissibility: no plan of length at most k beats V_k(s0)
        let bound = ok(optimal_value_bound(&dom, k))?;
        let vk = bound.get(k, dom.initial).unwrap();
        if let Some(best) = &brute.best {
            ensure!(best <= vk, "domain {i}: best {best} above bound {vk}");
        }
        for _ in 0..10 {
            let len = rng.random_range(0..=k);
            let v = ok(eval_total_order(&dom, &synth::random_total_order(&mut rng, &dom, len)))?.value;
            ensure!(v <= *vk, "domain {i}: plan value {v} above bound {vk}");
        }
    }
    Ok(())
}

fn stochastic(d: &PlanningDomain) -> Check {
    for s in State::all(d.width()) {
        for a in 0..d.actions.len() {
            let total = ok(d.successors(s, a))?.into_iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
            ensure!(total == one(), "{}: {s} {} sums to {total}", d.name, d.actions[a]);
        }
    }
    Ok(())
}

/// Stochasticity on the states reachable from the initial state.
fn stochastic_reachable(d: &PlanningDomain) -> Check {
    let mut seen = std::collections::HashSet::from([d.initial]);
    let mut stack = vec![d.initial];
    while let Some(s) = stack.pop() {
        for a in 0..d.actions.len() {
            let succ = ok(d.successors(s, a))?;
            let total = succ.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
            ensure!(total == one(), "{}: {s} {} sums to {total}", d.name, d.actions[a]);
            for (t, _) in succ {
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
    Ok(())
}

fn same_transitions(a: &PlanningDomain, b: &PlanningDomain) -> Check {
    for s in State::all(a.width()) {
        for act in 0..a.actions.len() {
            for t in State::all(a.width()) {
                let (p, q) = (ok(a.transition_prob_by_id(s, act, t))?, ok(b.transition_prob_by_id(s, act, t))?);
                ensure!(p == q, "{s} {} {t}: {p} vs {q}", a.actions[act]);
            }
        }
    }
    Ok(())
}

fn structure() -> Check {
    let castle = bundled::sandcastle();
    let mut rng = ChaCha8Rng::seed_from_u64(0x57AC);
    let generated: Vec<PlanningDomain> = (0..20).map(|_| synth::random_domain(&mut rng, 3, 2)).collect();

    // stochasticity
    stochastic(&castle)?;
    for d in &generated {
        ensure!(validate_domain(d).ok(), "generated domain fails validation");
        stochastic(d)?;
    }
    let inst = ok(majsat_to_instance(&bundled::demo_cnf()))?;
    stochastic(&inst.domain)?;
    for (_, m) in bundled::machines() {
        stochastic_reachable(&ok(tm_to_instance(&m, ""))?.domain)?;
    }

    // backend equivalence
    same_transitions(&castle, &ok(compile_pso_to_circuit(&castle))?)?;
    for d in &generated {
        same_transitions(d, &ok(compile_pso_to_circuit(d))?)?;
    }
    let erect = castle.action_index("erect-castle").unwrap();
    let circuit = bundled::erect_castle_circuit();
    for s in State::all(2) {
        for t in State::all(2) {
            let p = ok(castle.transition_prob_by_id(s, erect, t))?;
            let q = ok(circuit.eval(s, t))?;
            ensure!(p == q, "hand-written erect-castle circuit: {s} {t}: {p} vs {q}");
        }
    }

    // chain embeddings and looping over acyclic, on 100 random plans
    for i in 0..100 {
        let d = &generated[i % generated.len()];
        let len = rng.random_range(0..=5);
        let t = synth::random_total_order(&mut rng, d, len);
        let v = ok(eval_total_order(d, &t))?.value;
        let c = ok(eval_acyclic(d, &t.to_chain_controller()))?.value;
        ensure!(v == c, "plan {i}: chain controller {c} vs {v}");
        for interp in [Interpretation::Optimistic, Interpretation::Pessimistic, Interpretation::Average] {
            let p = ok(eval_plan(d, &Plan::PartialOrder(t.to_chain_partial()), interp))?.value;
            ensure!(v == p, "plan {i}: chain partial order {p} vs {v}");
        }
        let steps = rng.random_range(0..=4);
        let a = synth::random_controller(&mut rng, d, steps, true);
        ensure!(validate_plan(&Plan::Acyclic(a.clone()), d).ok(), "plan {i}: generated controller invalid");
        let x = ok(eval_acyclic(d, &a))?.value;
        let y = ok(eval_looping(d, &a))?.value;
        ensure!(x == y, "plan {i}: looping {y} vs acyclic {x}");
    }

    // round trips
    for (name, text) in bundled::FILES {
        let stable = match name.rsplit('.').next().unwrap() {
            "ppd" => {
                let d = ok(parse_domain(text))?;
                ok(parse_domain(&ok(print_domain(&d))?))? == d
            }
            "ppc" => {
                let c = ok(parse_circuit(text))?;
                ok(parse_circuit(&print_circuit(&c)))? == c
            }
            "ppl" => {
                let p = ok(parse_plan(text))?;
                ok(parse_plan(&print_plan(&p)))? == p
            }
            "obs" => {
                let (l, o) = ok(parse_observations(text))?;
                ok(parse_observations(&print_observations(&l, &o)))? == (l, o)
            }
            "cnf" => {
                let f = ok(parse_dimacs(text))?;
                ok(parse_dimacs(&print_dimacs(&f)))? == f
            }
            "tm" => {
                let m = ok(parse_machine(text))?;
                ok(parse_machine(&print_machine(&m)))? == m
            }
            other => return Err(format!("unexpected bundled file type {other}")),
        };
        ensure!(stable, "{name} does not survive print and re-parse");
    }
    Ok(())
}

fn monte_carlo() -> Check {
    let d = bundled::sandcastle();
    let runs = 100_000;
    let cases = [
        ("2(a)", bundled::fig2a()),
        ("2(b)", bundled::fig2b()),
        ("2(c)", bundled::fig2c()),
        ("2(d)", bundled::fig2d()),
    ];
    for (seed, (name, plan)) in cases.into_iter().enumerate() {
        let exact = ok(eval_plan(&d, &plan, Interpretation::Average))?.value;
        let mc = ok(simulate_plan(&d, &plan, runs, seed as u64 + 1, 10_000))?;
        let p = exact.to_f64().unwrap();
        let tol = 4.0 * (p * (1.0 - p) / runs as f64).sqrt();
        ensure!(
            mc.agrees_with(&exact, 4.0),
            "{name}: frequency {:.5}, exact {p:.5}, tolerance {tol:.5}",
            mc.frequency()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("worked sand-castle values", worked_values),
        ("partial-order interpretations", interpretations),
        ("MAJSAT certification", majsat),
        ("Turing machine certification", turing_machines),
        ("search soundness and completeness", search),
        ("structural properties", structure),
        ("Monte Carlo agreement", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {} ({name}): pass [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

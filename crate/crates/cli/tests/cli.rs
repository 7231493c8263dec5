use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn assets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn asset(name: &str) -> String {
    assets().join(name).display().to_string()
}

fn ppeval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppeval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn eval_meets_threshold() {
    let o = ppeval(&[
        "eval",
        "--domain",
        &asset("sandcastle.ppd"),
        "--plan",
        &asset("fig2a.ppl"),
        "--threshold",
        "0.4375",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "7/16 (0.437500)\n");
}

#[test]
fn eval_below_threshold_exits_one() {
    let o = ppeval(&[
        "eval",
        "--domain",
        &asset("sandcastle.ppd"),
        "--plan",
        &asset("fig2a.ppl"),
        "--threshold",
        "1/2",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn pessimistic_interpretation() {
    let o = ppeval(&[
        "eval",
        "--domain",
        &asset("sandcastle.ppd"),
        "--plan",
        &asset("fig2c.ppl"),
        "--interpretation",
        "pessimistic",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("21/32 (0.656250)\n"));
}

#[test]
fn acyclic_plan_with_expected_digs() {
    let o = ppeval(&[
        "eval",
        "--domain",
        &asset("sandcastle.ppd"),
        "--plan",
        &asset("fig2b.ppl"),
        "--count",
        "dig-moat",
    ]);
    assert_eq!(stdout(&o), "15/32 (0.468750)\nexpected dig-moat 7/4 (1.750000)\n");
}

#[test]
fn exhausted_search_reports_the_maximum() {
    let o = ppeval(&[
        "exists",
        "--domain",
        &asset("sandcastle.ppd"),
        "--class",
        "total",
        "--horizon",
        "3",
        "--threshold",
        "0.6",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "exhausted: max 37/64\n");
}

#[test]
fn found_search_prints_a_plan_file() {
    let o = ppeval(&[
        "exists",
        "--domain",
        &asset("sandcastle.ppd"),
        "--class",
        "total",
        "--horizon",
        "3",
        "--threshold",
        "37/64",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "# value 37/64 (0.578125)\ntotal-order: erect-castle erect-castle erect-castle\n"
    );
}

#[test]
fn capped_search_exits_three() {
    let o = ppeval(&[
        "exists",
        "--domain",
        &asset("sandcastle.ppd"),
        "--class",
        "total",
        "--horizon",
        "3",
        "--threshold",
        "0.6",
        "--node-cap",
        "4",
        "--no-prune",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn controller_search_needs_observations() {
    let base = [
        "exists",
        "--domain",
        &asset("sandcastle.ppd"),
        "--class",
        "looping",
        "--horizon",
        "2",
        "--threshold",
        "1",
    ];
    assert_eq!(code(&ppeval(&base)), 2);
    let obs = asset("moat.obs");
    let mut with = base.to_vec();
    with.extend(["--obs", &obs]);
    let o = ppeval(&with);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("# value 1/1 (1.000000)\nlooping\n"));
}

#[test]
fn extensions_listed_in_canonical_order() {
    let o = ppeval(&["extensions", "--plan", &asset("fig2c.ppl")]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "dig-moat dig-moat dig-moat erect-castle erect-castle\n\
         dig-moat dig-moat erect-castle dig-moat erect-castle\n"
    );
    assert_eq!(code(&ppeval(&["extensions", "--plan", &asset("fig2c.ppl"), "--cap", "1"])), 3);
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(code(&ppeval(&["eval", "--plan", &asset("fig2a.ppl")])), 2);
    assert_eq!(code(&ppeval(&["eval", "--domain", &asset("sandcastle.ppd"), "--plan", "missing.ppl"])), 2);
    assert_eq!(
        code(&ppeval(&["eval", "--domain", &asset("sandcastle.ppd"), "--plan", &asset("fig2a.ppl"), "--threshold", "0.1e3"])),
        2
    );
    // a plan naming an action the domain lacks fails validation
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ppl");
    std::fs::write(&bad, "total-order: fly\n").unwrap();
    let o = ppeval(&["eval", "--domain", &asset("sandcastle.ppd"), "--plan", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn validate_reports_ok() {
    let o = ppeval(&["validate", "--domain", &asset("sandcastle.ppd"), "--plan", &asset("fig2d.ppl")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "domain sandcastle: ok\nplan looping: ok\n");
}

#[test]
fn generated_majsat_instance_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ppeval(&["gen", "majsat", "--cnf", &asset("demo.cnf"), "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("threshold 1/2\n"));
    let domain = dir.path().join("majsat.ppd");
    let values: Vec<String> = ["majsat.ppl", "majsat-acyclic.ppl"]
        .iter()
        .map(|p| {
            let plan = dir.path().join(p);
            stdout(&ppeval(&["eval", "--domain", domain.to_str().unwrap(), "--plan", plan.to_str().unwrap()]))
        })
        .collect();
    assert_eq!(values[0], values[1]);
    assert!(values[0].starts_with("3/8 "));
}

#[test]
fn generated_machine_instance_follows_the_machine() {
    for (input, want) in [("11", 0), ("1", 1)] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let o = ppeval(&["gen", "tm", "--machine", &asset("parity.tm"), "--input", input, "--out", out]);
        assert_eq!(code(&o), 0);
        let domain = dir.path().join("tm.ppd");
        let plan = dir.path().join("tm.ppl");
        let o = ppeval(&[
            "eval",
            "--domain",
            domain.to_str().unwrap(),
            "--plan",
            plan.to_str().unwrap(),
            "--threshold",
            "1",
        ]);
        assert_eq!(code(&o), want, "input {input}");
    }
}

#[test]
fn converted_domain_gives_the_same_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&ppeval(&["convert", "--domain", &asset("sandcastle.ppd"), "--out", out])), 0);
    let domain = dir.path().join("sandcastle.ppd");
    for (plan, value) in [("fig2a.ppl", "7/16"), ("fig2b.ppl", "15/32"), ("fig2c.ppl", "85/128"), ("fig2d.ppl", "1/1")] {
        let o = ppeval(&["eval", "--domain", domain.to_str().unwrap(), "--plan", &asset(plan)]);
        assert!(stdout(&o).starts_with(&format!("{value} ")), "{plan}: {}", stdout(&o));
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = [
        "exists",
        "--domain",
        &asset("sandcastle.ppd"),
        "--class",
        "acyclic",
        "--obs",
        &asset("moat.obs"),
        "--horizon",
        "4",
        "--threshold",
        "15/32",
    ];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ppeval"))
            .args(args)
            .env("PPEVAL_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(one.stdout, ppeval(&args).stdout);
    assert_eq!(code(&run("zero")), 2);
}

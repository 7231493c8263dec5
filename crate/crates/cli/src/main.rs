//! `ppeval`: evaluate, search and generate probabilistic propositional plans.
//!
//! Exit codes: 0 success (value meets threshold, witness found), 1 negative
//! answer, 2 usage, parse or validation error, 3 a cap was hit first.
//! Results go to stdout and are deterministic; diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use ppeval::dsl::{
    circuit_file_name, compile_pso_to_circuit, parse_dimacs, parse_domain_with, parse_machine, parse_observations,
    parse_plan, print_circuit, print_domain, print_plan,
};
use ppeval::eval::{expected_action_count, eval_looping_truncated};
use ppeval::plans::{linear_extensions_capped, Observation, EXTENSION_CAP};
use ppeval::rational::{format_decimal, format_exact, parse_rational};
use ppeval::reductions::{majsat_to_instance, tm_to_instance, ReductionInstance};
use ppeval::search::{exists_acyclic, exists_looping, exists_total_order, SearchBudget, SearchOutcome, DEFAULT_NODE_CAP};
use ppeval::simulate::simulate_plan;
use ppeval::{eval_plan, meets_threshold, validate_domain, validate_plan, Backend, Error, Interpretation, Plan, PlanningDomain, Rational};

#[derive(Parser)]
#[command(name = "ppeval", version, about = "Exact evaluation and search for probabilistic propositional plans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a domain (and optionally a plan) for structural and stochastic defects.
    Validate {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Compute the exact goal probability of a plan.
    Eval(EvalArgs),
    /// Search for a plan of bounded size meeting a threshold.
    Exists(ExistsArgs),
    /// Write a reduction instance as domain, circuit and plan files.
    Gen {
        #[command(subcommand)]
        which: GenCommand,
    },
    /// Compile a PSO domain to transition circuits.
    Convert {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the linear extensions of a partially ordered plan.
    Extensions {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = EXTENSION_CAP)]
        cap: usize,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value = "average")]
    interpretation: Interpretation,
    /// Exit 1 when the value falls below this ("p/q" or decimal).
    #[arg(long, value_parser = rational)]
    threshold: Option<Rational>,
    /// Evaluate a looping plan cut off after this many actions.
    #[arg(long)]
    horizon: Option<usize>,
    /// Also report the expected number of executions of this action.
    #[arg(long)]
    count: Option<String>,
    /// Also run this many Monte Carlo executions.
    #[arg(long)]
    simulate: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    Total,
    Acyclic,
    Looping,
    PartialOrder,
}

#[derive(Args)]
struct ExistsArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, value_enum)]
    class: Class,
    /// Plan length (total, partial-order) or step count (acyclic, looping).
    #[arg(long)]
    horizon: usize,
    #[arg(long, value_parser = rational)]
    threshold: Rational,
    /// Labels and observation list, required for controller classes.
    #[arg(long)]
    obs: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: u64,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    time_cap: Option<f64>,
    /// Disable optimal-value pruning.
    #[arg(long)]
    no_prune: bool,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Two-step instance whose value is the fraction of satisfying assignments.
    Majsat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Deterministic instance whose constant plan reaches the goal iff the machine accepts.
    Tm {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s)
}

/// An error to report and exit 2 on.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: ppeval::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Loads a domain, resolving circuit references next to the domain file.
fn load_domain(path: &Path) -> Result<PlanningDomain, Failure> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let text = read(path)?;
    let domain = in_file(
        path,
        parse_domain_with(&text, |file| {
            let p = dir.join(file);
            fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))
        }),
    )?;
    let report = validate_domain(&domain);
    if !report.ok() {
        return Err(Failure(format!("{}: {report}", path.display())));
    }
    Ok(domain)
}

fn load_plan(path: &Path, domain: &PlanningDomain) -> Result<Plan, Failure> {
    let plan = in_file(path, parse_plan(&read(path)?))?;
    let report = validate_plan(&plan, domain);
    if !report.ok() {
        return Err(Failure(format!("{}: {report}", path.display())));
    }
    Ok(plan)
}

fn show(v: &Rational) -> String {
    format!("{} ({})", format_exact(v), format_decimal(v, 6))
}

fn validate(domain: &Path, plan: Option<&Path>) -> Outcome {
    let dir = domain.parent().unwrap_or(Path::new("."));
    let d = in_file(
        domain,
        parse_domain_with(&read(domain)?, |file| fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())),
    )?;
    let mut report = validate_domain(&d);
    println!("domain {}: {report}", d.name);
    if let Some(path) = plan {
        let p = in_file(path, parse_plan(&read(path)?))?;
        let r = validate_plan(&p, &d);
        println!("plan {}: {r}", p.class_keyword());
        report.merge(r);
    }
    Ok(if report.ok() { 0 } else { 2 })
}

fn eval(args: &EvalArgs) -> Outcome {
    let domain = load_domain(&args.domain)?;
    let plan = load_plan(&args.plan, &domain)?;
    let started = Instant::now();
    let result = match (&plan, args.horizon) {
        (Plan::Looping(p), Some(h)) => eval_looping_truncated(&domain, p, h)?,
        (_, Some(_)) => return Err(Failure("--horizon applies to looping plans only".into())),
        _ => eval_plan(&domain, &plan, args.interpretation)?,
    };
    eprintln!(
        "evaluated in {:?}: {} reachable states, {} pivots",
        started.elapsed(),
        result.diagnostics.reachable_states,
        result.diagnostics.pivots
    );
    println!("{result}");
    if let Some(w) = &result.witness {
        println!("witness {}", w.steps.join(" "));
    }
    if let Some(action) = &args.count {
        println!("expected {action} {}", expected_action_count(&domain, &plan, action)?);
    }
    if let Some(runs) = args.simulate {
        let mc = simulate_plan(&domain, &plan, runs, args.seed, 100_000)?;
        println!("simulated {}/{} ({:.6})", mc.successes, mc.runs, mc.frequency());
    }
    Ok(match &args.threshold {
        Some(t) if !meets_threshold(&result.value, t) => 1,
        _ => 0,
    })
}

fn observations(args: &ExistsArgs) -> Result<(Vec<String>, Vec<Observation>), Failure> {
    let path = args
        .obs
        .as_ref()
        .ok_or_else(|| Failure("--obs is required for acyclic and looping search".into()))?;
    in_file(path, parse_observations(&read(path)?))
}

fn exists(args: &ExistsArgs) -> Outcome {
    let domain = load_domain(&args.domain)?;
    let budget = SearchBudget {
        horizon: args.horizon,
        threshold: args.threshold.clone(),
        node_cap: args.node_cap,
        time_cap: args.time_cap.map(Duration::from_secs_f64),
        prune: !args.no_prune,
    };
    let started = Instant::now();
    let out: SearchOutcome = match args.class {
        Class::Total => exists_total_order(&domain, &budget)?,
        // existence over partial orders coincides with existence over total orders
        Class::PartialOrder => {
            let mut out = exists_total_order(&domain, &budget)?;
            out.witness = out.witness.map(|w| match w {
                Plan::TotalOrder(t) => Plan::PartialOrder(t.to_chain_partial()),
                other => other,
            });
            out
        }
        Class::Acyclic => {
            let (labels, obs) = observations(args)?;
            exists_acyclic(&domain, &budget, &labels, &obs)?
        }
        Class::Looping => {
            let (labels, obs) = observations(args)?;
            exists_looping(&domain, &budget, &labels, &obs)?
        }
    };
    eprintln!("searched {} candidates in {:?}", out.nodes, started.elapsed());
    let best = out.best.as_ref().map_or("none".to_string(), format_exact);
    Ok(match (&out.witness, &out.value) {
        (Some(w), Some(v)) => {
            println!("# value {}", show(v));
            print!("{}", print_plan(w));
            0
        }
        _ if out.exhausted => {
            println!("exhausted: max {best}");
            1
        }
        _ => {
            println!("capped after {} candidates: best so far {best}", out.nodes);
            3
        }
    })
}

/// Writes the domain file plus one netlist per circuit-backed action.
fn write_domain(domain: &PlanningDomain, out: &Path) -> Result<Vec<PathBuf>, Failure> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let path = out.join(format!("{}.ppd", domain.name));
    fs::write(&path, print_domain(domain)?)?;
    written.push(path);
    if let Backend::Circuit(circuits) = &domain.backend {
        for (a, c) in domain.actions.iter().zip(circuits) {
            let path = out.join(circuit_file_name(a));
            fs::write(&path, print_circuit(c))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_instance(inst: &ReductionInstance, out: &Path) -> Outcome {
    let mut written = write_domain(&inst.domain, out)?;
    let name = &inst.domain.name;
    let path = out.join(format!("{name}.ppl"));
    fs::write(&path, print_plan(&inst.plan))?;
    written.push(path);
    if let Some(alt) = &inst.alternate {
        let path = out.join(format!("{name}-{}.ppl", alt.class_keyword()));
        fs::write(&path, print_plan(alt))?;
        written.push(path);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!("threshold {}", format_exact(&inst.threshold));
    println!("provenance {}", inst.provenance);
    Ok(0)
}

fn gen(which: &GenCommand) -> Outcome {
    match which {
        GenCommand::Majsat { cnf, out } => {
            let f = in_file(cnf, parse_dimacs(&read(cnf)?))?;
            write_instance(&majsat_to_instance(&f)?, out)
        }
        GenCommand::Tm { machine, input, out } => {
            let m = in_file(machine, parse_machine(&read(machine)?))?;
            write_instance(&tm_to_instance(&m, input)?, out)
        }
    }
}

fn convert(domain: &Path, out: &Path) -> Outcome {
    let d = load_domain(domain)?;
    let compiled = compile_pso_to_circuit(&d)?;
    for p in write_domain(&compiled, out)? {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn extensions(plan: &Path, cap: usize) -> Outcome {
    let Plan::PartialOrder(p) = in_file(plan, parse_plan(&read(plan)?))? else {
        return Err(Failure(format!("{}: not a partial-order plan", plan.display())));
    };
    match linear_extensions_capped(&p, cap) {
        Ok(all) => {
            for t in &all {
                println!("{}", t.steps.join(" "));
            }
            eprintln!("{} extension(s)", all.len());
            Ok(0)
        }
        Err(e @ Error::CapExceeded { .. }) => {
            eprintln!("{e}");
            Ok(3)
        }
        Err(e) => Err(e.into()),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("PPEVAL_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure(format!("PPEVAL_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), Failure> {
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Validate { domain, plan } => validate(domain, plan.as_deref()),
        Command::Eval(args) => eval(args),
        Command::Exists(args) => exists(args),
        Command::Gen { which } => gen(which),
        Command::Convert { domain, out } => convert(domain, out),
        Command::Extensions { plan, cap } => extensions(plan, *cap),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

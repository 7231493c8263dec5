use std::fmt::Write as _;

use num_traits::One;

use super::{expect_identifier, lines, parse_circuit, Line};
use crate::domain::{Backend, Effect, Outcome, PlanningDomain, PsoCase, PsoOperator};
use crate::error::{Error, ParseError, Result};
use crate::formula::{parse_formula, Formula};
use crate::rational::{format_exact, is_probability, parse_rational};
use crate::state::State;

/// File name under which a circuit-backed action's netlist is stored.
pub fn circuit_file_name(action: &str) -> String {
    format!("{action}.ppc")
}

/// Parses a PSO domain. Circuit references (`action NAME circuit FILE`) are
/// rejected; use [`parse_domain_with`] to resolve them.
pub fn parse_domain(text: &str) -> Result<PlanningDomain> {
    parse_domain_with(text, |path| Err(format!("cannot resolve circuit file `{path}` without a loader")))
}

enum ActionDef<'a> {
    Pso {
        line: Line<'a>,
        name: String,
        cases: Vec<(Line<'a>, PsoCase)>,
    },
    Circuit {
        line: Line<'a>,
        name: String,
        path: String,
    },
}

/// Parses a domain file; `resolve` maps a circuit file reference to its text.
pub fn parse_domain_with<F>(text: &str, mut resolve: F) -> Result<PlanningDomain>
where
    F: FnMut(&str) -> std::result::Result<String, String>,
{
    let mut name: Option<String> = None;
    let mut variables: Option<Vec<String>> = None;
    let mut init: Option<State> = None;
    let mut goal: Option<Formula> = None;
    let mut goal_line: Option<Line> = None;
    let mut actions: Vec<ActionDef> = Vec::new();

    for line in lines(text) {
        let (kw, rest) = line.keyword();
        let vars_or_err = |variables: &Option<Vec<String>>| -> std::result::Result<Vec<String>, ParseError> {
            variables.clone().ok_or_else(|| line.error("`vars` must come before this line"))
        };
        match kw {
            "domain" => {
                if name.is_some() {
                    return Err(line.error("duplicate `domain` line").into());
                }
                name = Some(expect_identifier(&line, rest, "domain name")?.to_string());
            }
            "vars" => {
                if variables.is_some() {
                    return Err(line.error("duplicate `vars` line").into());
                }
                let mut vs: Vec<String> = Vec::new();
                for w in rest.split_whitespace() {
                    let v = expect_identifier(&line, w, "variable name")?;
                    if matches!(v, "true" | "false") {
                        return Err(line.error_at(w, "reserved word used as a variable").into());
                    }
                    if vs.iter().any(|x| x == v) {
                        return Err(line.error_at(w, format!("duplicate variable `{v}`")).into());
                    }
                    vs.push(v.to_string());
                }
                variables = Some(vs);
            }
            "init" => {
                let vars = vars_or_err(&variables)?;
                let mut state = State::zeros(vars.len());
                for w in rest.split_whitespace() {
                    let (value, var) = match w.strip_prefix('!') {
                        Some(v) => (false, v),
                        None => (true, w),
                    };
                    let idx = vars
                        .iter()
                        .position(|x| x == var)
                        .ok_or_else(|| line.error_at(w, format!("unknown variable `{var}`")))?;
                    state = state.with(idx, value);
                }
                init = Some(state);
            }
            "goal" => {
                goal = Some(parse_formula(rest, line.number, line.column_of(rest))?);
                goal_line = Some(line);
            }
            "action" => {
                let mut words = rest.split_whitespace();
                let action = expect_identifier(&line, words.next().unwrap_or(""), "action name")?.to_string();
                if actions.iter().any(|a| match a {
                    ActionDef::Pso { name, .. } | ActionDef::Circuit { name, .. } => *name == action,
                }) {
                    return Err(line.error(format!("duplicate action `{action}`")).into());
                }
                match (words.next(), words.next(), words.next()) {
                    (None, _, _) => actions.push(ActionDef::Pso {
                        line,
                        name: action,
                        cases: Vec::new(),
                    }),
                    (Some("circuit"), Some(path), None) => actions.push(ActionDef::Circuit {
                        line,
                        name: action,
                        path: path.to_string(),
                    }),
                    _ => return Err(line.error("expected `action NAME` or `action NAME circuit FILE`").into()),
                }
            }
            "case" => {
                let vars = vars_or_err(&variables)?;
                let Some(body) = rest.strip_suffix(':') else {
                    return Err(line.error("a case line must end with `:`").into());
                };
                let formula = parse_formula(body, line.number, line.column_of(body))?;
                let condition = formula
                    .bind(&vars)
                    .map_err(|e| Error::from(line.error(e.to_string())))?;
                match actions.last_mut() {
                    Some(ActionDef::Pso { cases, .. }) => cases.push((
                        line,
                        PsoCase {
                            condition,
                            outcomes: Vec::new(),
                        },
                    )),
                    _ => return Err(line.error("`case` outside a PSO action").into()),
                }
            }
            _ => {
                // outcome line `P: {effects}`
                let vars = vars_or_err(&variables)?;
                let Some((prob_text, effect_text)) = line.text.split_once(':') else {
                    return Err(line.error(format!("unknown directive `{kw}`")).into());
                };
                let probability = parse_rational(prob_text).map_err(|e| line.error(e))?;
                if !is_probability(&probability) {
                    return Err(line.error(format!("probability {} outside [0, 1]", prob_text.trim())).into());
                }
                let effect = parse_effect(&line, effect_text.trim(), &vars)?;
                match actions.last_mut() {
                    Some(ActionDef::Pso { cases, .. }) => match cases.last_mut() {
                        Some((_, case)) => case.outcomes.push(Outcome { probability, effect }),
                        None => return Err(line.error("outcome before any `case`").into()),
                    },
                    _ => return Err(line.error("outcome outside a PSO action").into()),
                }
            }
        }
    }

    let eof = ParseError::new(text.lines().count().max(1), 1, "");
    let missing = |what: &str| Error::from(ParseError { message: format!("missing `{what}` line"), ..eof.clone() });
    let name = name.ok_or_else(|| missing("domain"))?;
    let variables = variables.ok_or_else(|| missing("vars"))?;
    let initial = init.unwrap_or_else(|| State::zeros(variables.len()));
    let goal_formula = goal.ok_or_else(|| missing("goal"))?;
    let goal = goal_formula
        .bind(&variables)
        .map_err(|e| Error::from(goal_line.unwrap().error(e.to_string())))?;

    let action_names: Vec<String> = actions
        .iter()
        .map(|a| match a {
            ActionDef::Pso { name, .. } | ActionDef::Circuit { name, .. } => name.clone(),
        })
        .collect();
    let all_circuit = actions.iter().all(|a| matches!(a, ActionDef::Circuit { .. }));
    let any_circuit = actions.iter().any(|a| matches!(a, ActionDef::Circuit { .. }));
    let backend = if any_circuit {
        if !all_circuit {
            return Err(Error::Unsupported("a domain cannot mix PSO and circuit actions".into()));
        }
        let mut circuits = Vec::new();
        for a in actions {
            let ActionDef::Circuit { line, path, .. } = a else { unreachable!() };
            let text = resolve(&path).map_err(|e| line.error(e))?;
            let circuit = parse_circuit(&text).map_err(|e| match e {
                Error::Parse(p) => Error::Parse(ParseError::new(
                    line.number,
                    line.column,
                    format!("in `{path}` at {}:{}: {}", p.line, p.column, p.message),
                )),
                other => other,
            })?;
            circuits.push(circuit);
        }
        Backend::Circuit(circuits)
    } else {
        let mut ops = Vec::new();
        for a in actions {
            let ActionDef::Pso { line, name, cases } = a else { unreachable!() };
            match cases.last() {
                None => return Err(line.error(format!("action `{name}` has no cases")).into()),
                Some((case_line, case)) if !case.condition.is_true() => {
                    return Err(case_line
                        .error(format!("the last case of `{name}` must be `case true:`"))
                        .into())
                }
                _ => {}
            }
            for (case_line, case) in &cases {
                let sum = case
                    .outcomes
                    .iter()
                    .fold(crate::rational::zero(), |acc, o| acc + &o.probability);
                if !sum.is_one() {
                    return Err(case_line
                        .error(format!("outcome probabilities sum to {}, not 1", format_exact(&sum)))
                        .into());
                }
            }
            ops.push(PsoOperator {
                name,
                cases: cases.into_iter().map(|(_, c)| c).collect(),
            });
        }
        Backend::Pso(ops)
    };
    PlanningDomain::new(name, variables, initial, goal, action_names, backend)
}

fn parse_effect(line: &Line, text: &str, vars: &[String]) -> std::result::Result<Effect, ParseError> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| line.error_at(text, "expected `{v := 0|1, ...}`"))?;
    let mut assignments: Vec<(usize, bool)> = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, value) = part
            .split_once(":=")
            .ok_or_else(|| line.error_at(part, "expected `v := 0|1`"))?;
        let var = var.trim();
        let idx = vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| line.error_at(part, format!("unknown variable `{var}`")))?;
        let value = match value.trim() {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(line.error_at(part, format!("expected 0 or 1, found `{other}`"))),
        };
        if assignments.iter().any(|&(i, _)| i == idx) {
            return Err(line.error_at(part, format!("`{var}` assigned twice")));
        }
        assignments.push((idx, value));
    }
    Ok(Effect(assignments))
}

/// Prints a PSO or circuit-backed domain in `.ppd` syntax. Circuit actions
/// are written as references to [`circuit_file_name`].
pub fn print_domain(domain: &PlanningDomain) -> Result<String> {
    let mut out = String::new();
    let vars = &domain.variables;
    writeln!(out, "domain {}", domain.name).unwrap();
    writeln!(out, "vars {}", vars.join(" ")).unwrap();
    let literals: Vec<String> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| if domain.initial.get(i) { v.clone() } else { format!("!{v}") })
        .collect();
    writeln!(out, "init {}", literals.join(" ")).unwrap();
    writeln!(out, "goal {}", domain.goal.unbind(vars)).unwrap();
    match &domain.backend {
        Backend::Pso(ops) => {
            for op in ops {
                writeln!(out, "\naction {}", op.name).unwrap();
                for case in &op.cases {
                    writeln!(out, "case {}:", case.condition.unbind(vars)).unwrap();
                    for o in &case.outcomes {
                        let effects: Vec<String> = o
                            .effect
                            .0
                            .iter()
                            .map(|&(i, b)| format!("{} := {}", vars[i], b as u8))
                            .collect();
                        writeln!(out, "  {}: {{{}}}", format_exact(&o.probability), effects.join(", ")).unwrap();
                    }
                }
            }
        }
        Backend::Circuit(_) => {
            out.push('\n');
            for a in &domain.actions {
                writeln!(out, "action {a} circuit {}", circuit_file_name(a)).unwrap();
            }
        }
        Backend::Flat(_) => return Err(Error::Unsupported("flat domains have no text format".into())),
    }
    Ok(out)
}

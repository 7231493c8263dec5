use std::fmt::Write as _;

use super::{expect_identifier, lines, Line};
use crate::error::{ParseError, Result};
use crate::formula::parse_formula;
use crate::plans::{ControllerPlan, Edge, Observation, PartialOrderPlan, Plan, PlanStep, TotalOrderPlan};

#[derive(Clone, Copy, PartialEq)]
enum Class {
    Total,
    Acyclic,
    Looping,
    Partial,
}

fn class_of(keyword: &str) -> Option<Class> {
    match keyword.trim_end_matches(':') {
        "total-order" => Some(Class::Total),
        "acyclic" => Some(Class::Acyclic),
        "looping" => Some(Class::Looping),
        "partial-order" => Some(Class::Partial),
        _ => None,
    }
}

fn parse_observation(line: &Line, rest: &str) -> std::result::Result<Observation, ParseError> {
    let (cond, label) = rest
        .rsplit_once("->")
        .ok_or_else(|| line.error("expected `obs FORMULA -> label`"))?;
    let condition = parse_formula(cond, line.number, line.column_of(cond))?;
    let label = expect_identifier(line, label.trim(), "label")?.to_string();
    Ok(Observation { condition, label })
}

/// Parses a plan file. The first line names the class; the body is checked
/// for syntax only. Structure is checked by `validate_plan`.
pub fn parse_plan(text: &str) -> Result<Plan> {
    let mut iter = lines(text);
    let header = iter
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "empty plan file: expected a class keyword"))?;
    let (kw, rest) = header.keyword();
    let class = class_of(kw).ok_or_else(|| {
        header.error(format!(
            "unknown plan class `{}`; expected total-order, acyclic, looping or partial-order",
            kw.trim_end_matches(':')
        ))
    })?;

    if class == Class::Total {
        let mut steps: Vec<String> = Vec::new();
        let first = std::iter::once((header, rest));
        for (line, words) in first.chain(iter.map(|l| (l, l.text))) {
            for w in words.split_whitespace() {
                steps.push(expect_identifier(&line, w, "action name")?.to_string());
            }
        }
        return Ok(Plan::TotalOrder(TotalOrderPlan { steps }));
    }
    if !rest.is_empty() {
        return Err(header.error_at(rest, "unexpected text after the class keyword").into());
    }

    let mut controller = ControllerPlan::default();
    let mut partial = PartialOrderPlan::default();
    for line in iter {
        let (kw, rest) = line.keyword();
        let words: Vec<&str> = rest.split_whitespace().collect();
        match (class, kw) {
            (Class::Acyclic | Class::Looping, "labels") => {
                for w in &words {
                    controller.labels.push(expect_identifier(&line, w, "label")?.to_string());
                }
            }
            (Class::Acyclic | Class::Looping, "obs") => controller.observations.push(parse_observation(&line, rest)?),
            (Class::Acyclic | Class::Looping, "step") => match words.as_slice() {
                [q, a] => controller.steps.push(PlanStep {
                    name: expect_identifier(&line, q, "step name")?.to_string(),
                    action: expect_identifier(&line, a, "action name")?.to_string(),
                }),
                _ => return Err(line.error("expected `step STEP ACTION`").into()),
            },
            (Class::Acyclic | Class::Looping, "edge") => match words.as_slice() {
                [q, l, "->", r] => controller.edges.push(Edge {
                    from: expect_identifier(&line, q, "step name")?.to_string(),
                    label: expect_identifier(&line, l, "label")?.to_string(),
                    to: expect_identifier(&line, r, "step name")?.to_string(),
                }),
                _ => return Err(line.error("expected `edge STEP LABEL -> STEP`").into()),
            },
            (Class::Acyclic | Class::Looping, "start") => match words.as_slice() {
                [q] => {
                    if controller.start.is_some() {
                        return Err(line.error("duplicate `start` line").into());
                    }
                    controller.start = Some(expect_identifier(&line, q, "step name")?.to_string());
                }
                _ => return Err(line.error("expected `start STEP`").into()),
            },
            (Class::Partial, "node") => match words.as_slice() {
                [n, a] => partial.nodes.push(PlanStep {
                    name: expect_identifier(&line, n, "node name")?.to_string(),
                    action: expect_identifier(&line, a, "action name")?.to_string(),
                }),
                _ => return Err(line.error("expected `node NODE ACTION`").into()),
            },
            (Class::Partial, "before") => match words.as_slice() {
                [a, b] => partial.before.push((
                    expect_identifier(&line, a, "node name")?.to_string(),
                    expect_identifier(&line, b, "node name")?.to_string(),
                )),
                _ => return Err(line.error("expected `before NODE NODE`").into()),
            },
            _ => return Err(line.error(format!("unexpected `{kw}` in a {} plan", header.keyword().0)).into()),
        }
    }
    Ok(match class {
        Class::Acyclic => Plan::Acyclic(controller),
        Class::Looping => Plan::Looping(controller),
        Class::Partial => Plan::PartialOrder(partial),
        Class::Total => unreachable!(),
    })
}

/// Parses a standalone label set and observation list (`labels` and `obs`
/// lines), as used to fix the observation map during plan search.
pub fn parse_observations(text: &str) -> Result<(Vec<String>, Vec<Observation>)> {
    let mut labels = Vec::new();
    let mut observations = Vec::new();
    for line in lines(text) {
        let (kw, rest) = line.keyword();
        match kw {
            "labels" => {
                for w in rest.split_whitespace() {
                    labels.push(expect_identifier(&line, w, "label")?.to_string());
                }
            }
            "obs" => observations.push(parse_observation(&line, rest)?),
            other => return Err(line.error(format!("expected `labels` or `obs`, found `{other}`")).into()),
        }
    }
    Ok((labels, observations))
}

pub fn print_observations(labels: &[String], observations: &[Observation]) -> String {
    let mut out = String::new();
    writeln!(out, "labels {}", labels.join(" ")).unwrap();
    for o in observations {
        writeln!(out, "obs {} -> {}", o.condition, o.label).unwrap();
    }
    out
}

pub fn print_plan(plan: &Plan) -> String {
    let mut out = String::new();
    match plan {
        Plan::TotalOrder(p) => {
            out.push_str("total-order:");
            for s in &p.steps {
                write!(out, " {s}").unwrap();
            }
            out.push('\n');
        }
        Plan::Acyclic(c) | Plan::Looping(c) => {
            writeln!(out, "{}", plan.class_keyword()).unwrap();
            out.push_str(&print_observations(&c.labels, &c.observations));
            for s in &c.steps {
                writeln!(out, "step {} {}", s.name, s.action).unwrap();
            }
            for e in &c.edges {
                writeln!(out, "edge {} {} -> {}", e.from, e.label, e.to).unwrap();
            }
            if let Some(start) = &c.start {
                writeln!(out, "start {start}").unwrap();
            }
        }
        Plan::PartialOrder(p) => {
            writeln!(out, "partial-order").unwrap();
            for n in &p.nodes {
                writeln!(out, "node {} {}", n.name, n.action).unwrap();
            }
            for (a, b) in &p.before {
                writeln!(out, "before {a} {b}").unwrap();
            }
        }
    }
    out
}

use std::fmt::Write as _;

use super::{lines, Line};
use crate::error::{ParseError, Result};
use crate::reductions::{Move, Rule, TuringMachineSpec};

fn split_tuple<'a>(line: &Line, text: &'a str, arity: usize) -> std::result::Result<Vec<&'a str>, ParseError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| line.error_at(text.trim(), "expected a parenthesized tuple"))?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != arity || parts.iter().any(|p| p.is_empty()) {
        return Err(line.error_at(text.trim(), format!("expected {arity} comma-separated fields")));
    }
    Ok(parts)
}

/// Parses a `.tm` machine description. The first listed state is the start
/// state; the tape alphabet is the blank followed by every other symbol in
/// order of first appearance in the rules.
pub fn parse_machine(text: &str) -> Result<TuringMachineSpec> {
    let mut states: Option<Vec<String>> = None;
    let mut accept = None;
    let mut reject = None;
    let mut blank: Option<String> = None;
    let mut space = None;
    let mut raw_rules: Vec<(Line, [String; 5])> = Vec::new();

    for line in lines(text) {
        let (kw, rest) = line.keyword();
        match kw {
            "states" => {
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(line.error("at least one state is required").into());
                }
                states = Some(names);
            }
            "accept" => accept = Some((line, rest.to_string())),
            "reject" => reject = Some((line, rest.to_string())),
            "blank" => {
                if rest.split_whitespace().count() != 1 {
                    return Err(line.error("expected one blank symbol").into());
                }
                blank = Some(rest.to_string());
            }
            "space" => {
                space = Some(
                    rest.parse::<usize>()
                        .ok()
                        .filter(|&k| k > 0)
                        .ok_or_else(|| line.error("expected a positive cell count"))?,
                )
            }
            "rule" => {
                let (lhs, rhs) = rest
                    .split_once("->")
                    .ok_or_else(|| line.error("expected `rule (q,s) -> (q',s',L|R|S)`"))?;
                let l = split_tuple(&line, lhs, 2)?;
                let r = split_tuple(&line, rhs, 3)?;
                raw_rules.push((
                    line,
                    [l[0].into(), l[1].into(), r[0].into(), r[1].into(), r[2].into()],
                ));
            }
            other => return Err(line.error(format!("unknown directive `{other}`")).into()),
        }
    }
    let eof = text.lines().count().max(1);
    let missing = |what: &str| ParseError::new(eof, 1, format!("missing `{what}` line"));
    let states = states.ok_or_else(|| missing("states"))?;
    let blank = blank.ok_or_else(|| missing("blank"))?;
    let space = space.ok_or_else(|| missing("space"))?;
    let state_index = |line: &Line, name: &str| {
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| line.error(format!("unknown state `{name}`")))
    };
    let (accept_line, accept_name) = accept.ok_or_else(|| missing("accept"))?;
    let (reject_line, reject_name) = reject.ok_or_else(|| missing("reject"))?;
    let accept = state_index(&accept_line, &accept_name)?;
    let reject = state_index(&reject_line, &reject_name)?;
    if accept == reject {
        return Err(reject_line.error("accept and reject states must differ").into());
    }

    let mut alphabet = vec![blank];
    for (_, r) in &raw_rules {
        for sym in [&r[1], &r[3]] {
            if !alphabet.contains(sym) {
                alphabet.push(sym.clone());
            }
        }
    }
    let mut rules = Vec::new();
    for (line, r) in &raw_rules {
        let state = state_index(line, &r[0])?;
        let next = state_index(line, &r[2])?;
        if state == accept || state == reject {
            return Err(line.error("halting states take no rules").into());
        }
        let read = alphabet.iter().position(|s| *s == r[1]).unwrap();
        let write = alphabet.iter().position(|s| *s == r[3]).unwrap();
        let mv = match r[4].as_str() {
            "L" => Move::Left,
            "R" => Move::Right,
            "S" => Move::Stay,
            other => return Err(line.error(format!("move must be L, R or S, found `{other}`")).into()),
        };
        if rules.iter().any(|x: &Rule| x.state == state && x.read == read) {
            return Err(line.error(format!("second rule for ({}, {})", r[0], r[1])).into());
        }
        rules.push(Rule {
            state,
            read,
            next,
            write,
            mv,
        });
    }
    for (q, name) in states.iter().enumerate() {
        if q == accept || q == reject {
            continue;
        }
        for (sym_index, sym) in alphabet.iter().enumerate() {
            if !rules.iter().any(|r| r.state == q && r.read == sym_index) {
                return Err(ParseError::new(eof, 1, format!("no rule for ({name}, {sym}); the machine must be total")).into());
            }
        }
    }
    Ok(TuringMachineSpec {
        states,
        accept,
        reject,
        alphabet,
        rules,
        space,
    })
}

pub fn print_machine(machine: &TuringMachineSpec) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", machine.states.join(" ")).unwrap();
    writeln!(out, "accept {}", machine.states[machine.accept]).unwrap();
    writeln!(out, "reject {}", machine.states[machine.reject]).unwrap();
    writeln!(out, "blank {}", machine.alphabet[0]).unwrap();
    writeln!(out, "space {}", machine.space).unwrap();
    for r in &machine.rules {
        let mv = match r.mv {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        };
        writeln!(
            out,
            "rule ({},{}) -> ({},{},{mv})",
            machine.states[r.state], machine.alphabet[r.read], machine.states[r.next], machine.alphabet[r.write]
        )
        .unwrap();
    }
    out
}

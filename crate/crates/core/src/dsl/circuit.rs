use std::collections::HashMap;
use std::fmt::Write as _;

use super::{expect_identifier, lines, Line};
use crate::circuit::{validate_circuit, Gate, GateKind, TransitionCircuit};
use crate::error::{Error, ParseError, Result};

fn parse_index(line: &Line, word: &str) -> std::result::Result<usize, ParseError> {
    word.parse()
        .map_err(|_| line.error_at(word, format!("expected a bit index, found `{word}`")))
}

/// Parses a `.ppc` netlist and runs [`validate_circuit`] on the result.
pub fn parse_circuit(text: &str) -> Result<TransitionCircuit> {
    let mut name = None;
    let mut widths = None;
    let mut in_gates = false;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut outputs: Option<Vec<usize>> = None;
    let mut unit = None;

    for line in lines(text) {
        let (kw, rest) = line.keyword();
        match kw {
            "circuit" => {
                if name.is_some() {
                    return Err(line.error("duplicate `circuit` line").into());
                }
                name = Some(expect_identifier(&line, rest, "circuit name")?.to_string());
            }
            "inputs" => {
                let w: Vec<&str> = rest.split_whitespace().collect();
                match w.as_slice() {
                    ["before", b, "after", a] => widths = Some((parse_index(&line, b)?, parse_index(&line, a)?)),
                    _ => return Err(line.error("expected `inputs before K after K`").into()),
                }
            }
            "gates:" => in_gates = true,
            "out" => {
                let mut bits = Vec::new();
                for w in rest.split_whitespace() {
                    bits.push(*ids.get(w).ok_or_else(|| line.error_at(w, format!("undefined gate `{w}`")))?);
                }
                outputs = Some(bits);
            }
            "unit" => {
                let w = rest.trim();
                unit = Some(*ids.get(w).ok_or_else(|| line.error_at(w, format!("undefined gate `{w}`")))?);
            }
            _ if in_gates => {
                let (id, def) = line
                    .text
                    .split_once('=')
                    .ok_or_else(|| line.error("expected `ID = KIND [args]`"))?;
                let id = expect_identifier(&line, id.trim(), "gate id")?;
                if ids.contains_key(id) {
                    return Err(line.error_at(id, format!("gate `{id}` defined twice")).into());
                }
                let mut words = def.split_whitespace();
                let kind_word = words.next().ok_or_else(|| line.error("missing gate kind"))?;
                let args: Vec<&str> = words.collect();
                let gate_refs = |args: &[&str]| -> std::result::Result<Vec<usize>, ParseError> {
                    args.iter()
                        .map(|w| ids.get(*w).copied().ok_or_else(|| line.error_at(w, format!("undefined gate `{w}`"))))
                        .collect()
                };
                let index_arg = |args: &[&str]| -> std::result::Result<usize, ParseError> {
                    match args {
                        [w] => parse_index(&line, w),
                        _ => Err(line.error("input gates take exactly one bit index")),
                    }
                };
                let gate = match kind_word {
                    "CONST0" => Gate::new(GateKind::Const0, gate_refs(&args)?),
                    "CONST1" => Gate::new(GateKind::Const1, gate_refs(&args)?),
                    "NOT" => Gate::new(GateKind::Not, gate_refs(&args)?),
                    "AND" => Gate::new(GateKind::And, gate_refs(&args)?),
                    "OR" => Gate::new(GateKind::Or, gate_refs(&args)?),
                    "XOR" => Gate::new(GateKind::Xor, gate_refs(&args)?),
                    "INPUT_BEFORE" => Gate::new(GateKind::InputBefore(index_arg(&args)?), vec![]),
                    "INPUT_AFTER" => Gate::new(GateKind::InputAfter(index_arg(&args)?), vec![]),
                    other => return Err(line.error_at(kind_word, format!("unknown gate kind `{other}`")).into()),
                };
                ids.insert(id.to_string(), gates.len());
                gates.push(gate);
            }
            other => return Err(line.error(format!("unknown directive `{other}`")).into()),
        }
    }
    let eof = text.lines().count().max(1);
    let name = name.ok_or_else(|| ParseError::new(eof, 1, "missing `circuit` line"))?;
    let (before_width, after_width) = widths.ok_or_else(|| ParseError::new(eof, 1, "missing `inputs` line"))?;
    let output_bits = outputs.ok_or_else(|| ParseError::new(eof, 1, "missing `out` line"))?;
    let circuit = TransitionCircuit {
        name,
        before_width,
        after_width,
        gates,
        unit,
        output_bits,
    };
    let report = validate_circuit(&circuit);
    if !report.ok() {
        return Err(Error::InvalidCircuit(report));
    }
    Ok(circuit)
}

pub fn print_circuit(circuit: &TransitionCircuit) -> String {
    let mut out = String::new();
    writeln!(out, "circuit {}", circuit.name).unwrap();
    writeln!(out, "inputs before {} after {}", circuit.before_width, circuit.after_width).unwrap();
    writeln!(out, "gates:").unwrap();
    for (i, gate) in circuit.gates.iter().enumerate() {
        write!(out, "  g{i} = {}", gate.kind.keyword()).unwrap();
        match gate.kind {
            GateKind::InputBefore(b) | GateKind::InputAfter(b) => write!(out, " {b}").unwrap(),
            _ => {
                for input in &gate.inputs {
                    write!(out, " g{input}").unwrap();
                }
            }
        }
        out.push('\n');
    }
    let bits: Vec<String> = circuit.output_bits.iter().map(|g| format!("g{g}")).collect();
    writeln!(out, "out {}", bits.join(" ")).unwrap();
    if let Some(u) = circuit.unit {
        writeln!(out, "unit g{u}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::rational::ratio;
    use crate::state::State;

    #[test]
    fn single_const1_bit() {
        let c = parse_circuit("circuit half\ninputs before 1 after 1\ngates:\n  a = CONST1\nout a\n").unwrap();
        for b in State::all(1) {
            for a in State::all(1) {
                assert_eq!(c.eval(b, a).unwrap(), ratio(1, 2));
            }
        }
    }

    #[test]
    fn out_of_range_input_rejected() {
        let err = parse_circuit("circuit c\ninputs before 2 after 2\ngates:\n  a = INPUT_AFTER 2\nout a\n").unwrap_err();
        assert!(matches!(err, Error::InvalidCircuit(_)), "{err}");
    }

    #[test]
    fn undefined_reference_rejected() {
        let err = parse_circuit("circuit c\ninputs before 1 after 1\ngates:\n  a = NOT b\nout a\n").unwrap_err();
        match err {
            Error::Parse(p) => {
                assert_eq!(p.line, 4);
                assert!(p.message.contains("undefined gate `b`"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn not_with_two_inputs_rejected() {
        let text = "circuit c\ninputs before 1 after 1\ngates:\n  a = INPUT_BEFORE 0\n  b = NOT a a\nout b\n";
        assert!(matches!(parse_circuit(text), Err(Error::InvalidCircuit(_))));
    }

    #[test]
    fn bundled_erect_castle_roundtrips() {
        let c = parse_circuit(bundled::ERECT_CASTLE_PPC).unwrap();
        assert_eq!(parse_circuit(&print_circuit(&c)).unwrap(), c);
    }
}

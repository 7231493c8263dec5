use crate::circuit::{CircuitBuilder, Wire};
use crate::domain::{Backend, PlanningDomain, ENUMERATION_CAP};
use crate::dsl::print_machine;
use crate::error::{Error, Result};
use crate::formula::Condition;
use crate::plans::{ControllerPlan, Plan};
use crate::rational::ratio;
use crate::state::State;

use super::{digest, ReductionInstance};

/// Name of the single action in generated machine domains.
pub const TM_ACTION: &str = "step";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Stay,
}

/// `(state, read) -> (next, write, mv)`, all as indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub state: usize,
    pub read: usize,
    pub next: usize,
    pub write: usize,
    pub mv: Move,
}

/// A deterministic machine with a bounded tape. State 0 is the start state
/// and symbol 0 the blank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringMachineSpec {
    pub states: Vec<String>,
    pub accept: usize,
    pub reject: usize,
    pub alphabet: Vec<String>,
    pub rules: Vec<Rule>,
    pub space: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmOutcome {
    Accept { steps: u64 },
    Reject { steps: u64 },
    Timeout,
}

impl TuringMachineSpec {
    fn rule(&self, state: usize, read: usize) -> Option<&Rule> {
        self.rules.iter().find(|r| r.state == state && r.read == read)
    }

    /// Initial tape: the input symbols followed by blanks.
    pub fn initial_tape(&self, input: &str) -> Result<Vec<usize>> {
        let mut tape = vec![0; self.space];
        let symbols: Vec<char> = input.chars().collect();
        if symbols.len() > self.space {
            return Err(Error::Unsupported(format!(
                "input of length {} does not fit on {} cells",
                symbols.len(),
                self.space
            )));
        }
        for (cell, c) in tape.iter_mut().zip(symbols) {
            *cell = self
                .alphabet
                .iter()
                .position(|s| *s == c.to_string())
                .ok_or_else(|| Error::Unsupported(format!("input symbol `{c}` is not in the tape alphabet")))?;
        }
        Ok(tape)
    }
}

fn bits_for(count: usize) -> usize {
    (usize::BITS - count.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// Runs the machine directly for at most `step_cap` steps.
pub fn simulate_tm(machine: &TuringMachineSpec, input: &str, step_cap: u64) -> Result<TmOutcome> {
    let mut tape = machine.initial_tape(input)?;
    let mut state = 0;
    let mut head = 0usize;
    for step in 0..=step_cap {
        if state == machine.accept {
            return Ok(TmOutcome::Accept { steps: step });
        }
        if state == machine.reject {
            return Ok(TmOutcome::Reject { steps: step });
        }
        if step == step_cap {
            break;
        }
        let rule = machine
            .rule(state, tape[head])
            .ok_or_else(|| Error::Unsupported(format!("no rule for state `{}`", machine.states[state])))?;
        tape[head] = rule.write;
        state = rule.next;
        head = match rule.mv {
            Move::Stay => head,
            Move::Left if head > 0 => head - 1,
            Move::Right if head + 1 < machine.space => head + 1,
            _ => {
                return Err(Error::SpaceBoundViolation {
                    space: machine.space,
                    step: step + 1,
                })
            }
        };
    }
    Ok(TmOutcome::Timeout)
}

struct Layout {
    state_bits: usize,
    cell_bits: usize,
    space: usize,
}

impl Layout {
    fn width(&self) -> usize {
        self.state_bits + self.space * (1 + self.cell_bits)
    }

    fn state(&self, j: usize) -> usize {
        j
    }

    fn head(&self, i: usize) -> usize {
        self.state_bits + i
    }

    fn cell(&self, i: usize, j: usize) -> usize {
        self.state_bits + self.space + i * self.cell_bits + j
    }

    fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = (0..self.state_bits).map(|j| format!("q{j}")).collect();
        v.extend((0..self.space).map(|i| format!("h{i}")));
        for i in 0..self.space {
            v.extend((0..self.cell_bits).map(|j| format!("c{i}_{j}")));
        }
        v
    }
}

fn code_equals(b: &mut CircuitBuilder, wires: &[Wire], code: usize) -> Wire {
    let lits: Vec<Wire> = wires
        .iter()
        .enumerate()
        .map(|(j, &w)| if (code >> j) & 1 == 1 { w } else { b.not(w) })
        .collect();
    b.and(&lits)
}

/// The one-step configuration map as a deterministic circuit: output 1 iff
/// `after` is the successor of `before`. Halting and malformed configurations
/// map to themselves; a move off either end of the tape leaves the head where
/// it is.
fn step_circuit(machine: &TuringMachineSpec, layout: &Layout) -> crate::circuit::TransitionCircuit {
    let width = layout.width();
    let k = layout.space;
    let mut b = CircuitBuilder::new(width, width);
    let q: Vec<Wire> = (0..layout.state_bits).map(|j| b.before(layout.state(j))).collect();
    let h: Vec<Wire> = (0..k).map(|i| b.before(layout.head(i))).collect();
    let cells: Vec<Vec<Wire>> = (0..k)
        .map(|i| (0..layout.cell_bits).map(|j| b.before(layout.cell(i, j))).collect())
        .collect();

    let one_hot_terms: Vec<Wire> = (0..k)
        .map(|i| {
            let mut lits = vec![h[i]];
            for (j, &w) in h.iter().enumerate() {
                if j != i {
                    lits.push(b.not(w));
                }
            }
            b.and(&lits)
        })
        .collect();
    let one_hot = b.or(&one_hot_terms);

    let reads: Vec<Wire> = (0..machine.alphabet.len())
        .map(|sym| {
            let terms: Vec<Wire> = (0..k)
                .map(|i| {
                    let eq = code_equals(&mut b, &cells[i], sym);
                    b.and(&[h[i], eq])
                })
                .collect();
            b.or(&terms)
        })
        .collect();
    let fires: Vec<Wire> = machine
        .rules
        .iter()
        .map(|r| {
            let in_state = code_equals(&mut b, &q, r.state);
            b.and(&[one_hot, in_state, reads[r.read]])
        })
        .collect();
    let active = b.or(&fires);
    let fired_where = |b: &mut CircuitBuilder, pred: &dyn Fn(&Rule) -> bool| -> Wire {
        let ws: Vec<Wire> = machine.rules.iter().zip(&fires).filter(|(r, _)| pred(r)).map(|(_, &f)| f).collect();
        b.or(&ws)
    };

    let mut next: Vec<Wire> = Vec::with_capacity(width);
    for (j, &qj) in q.iter().enumerate() {
        let set = fired_where(&mut b, &|r| (r.next >> j) & 1 == 1);
        next.push(b.mux(active, set, qj));
    }
    let left = fired_where(&mut b, &|r| r.mv == Move::Left);
    let right = fired_where(&mut b, &|r| r.mv == Move::Right);
    let stay = fired_where(&mut b, &|r| r.mv == Move::Stay);
    for i in 0..k {
        let mut terms = vec![b.and(&[stay, h[i]])];
        if i + 1 < k {
            terms.push(b.and(&[left, h[i + 1]]));
        } else {
            terms.push(b.and(&[right, h[i]]));
        }
        if i > 0 {
            terms.push(b.and(&[right, h[i - 1]]));
        } else {
            terms.push(b.and(&[left, h[i]]));
        }
        let moved = b.or(&terms);
        next.push(b.mux(active, moved, h[i]));
    }
    let write_bits: Vec<Wire> = (0..layout.cell_bits)
        .map(|j| fired_where(&mut b, &|r| (r.write >> j) & 1 == 1))
        .collect();
    for i in 0..k {
        let here = b.and(&[active, h[i]]);
        for j in 0..layout.cell_bits {
            next.push(b.mux(here, write_bits[j], cells[i][j]));
        }
    }

    let eqs: Vec<Wire> = next
        .iter()
        .enumerate()
        .map(|(v, &n)| {
            let a = b.after(v);
            b.equiv(a, n)
        })
        .collect();
    let unit = b.and(&eqs);
    let zero = b.constant(false);
    b.finish(TM_ACTION, &[zero, unit], 1)
}

/// Builds the configuration-graph instance for `machine` on `input`: control
/// state in binary, head position one-hot, each cell in binary.
pub fn tm_to_instance(machine: &TuringMachineSpec, input: &str) -> Result<ReductionInstance> {
    let layout = Layout {
        state_bits: bits_for(machine.states.len()),
        cell_bits: bits_for(machine.alphabet.len()),
        space: machine.space,
    };
    let width = layout.width();
    if width > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "machine encoding variable count",
            count: width as u64,
            cap: ENUMERATION_CAP as u64,
        });
    }
    let tape = machine.initial_tape(input)?;
    let mut initial = State::zeros(width).with(layout.head(0), true);
    for (i, &sym) in tape.iter().enumerate() {
        for j in 0..layout.cell_bits {
            initial = initial.with(layout.cell(i, j), (sym >> j) & 1 == 1);
        }
    }
    let goal = Condition::And(
        (0..layout.state_bits)
            .map(|j| {
                let v = Condition::Var(layout.state(j));
                if (machine.accept >> j) & 1 == 1 {
                    v
                } else {
                    Condition::Not(Box::new(v))
                }
            })
            .collect(),
    );
    let circuit = step_circuit(machine, &layout);
    let domain = PlanningDomain::new(
        "tm",
        layout.names(),
        initial,
        goal,
        vec![TM_ACTION.to_string()],
        Backend::Circuit(vec![circuit]),
    )?;
    Ok(ReductionInstance {
        domain,
        plan: Plan::Looping(ControllerPlan::constant(TM_ACTION)),
        alternate: None,
        threshold: ratio(1, 1),
        provenance: digest(&format!("{}input {input}\n", print_machine(machine))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::domain::validate_domain;
    use crate::dsl::parse_machine;

    #[test]
    fn bit_widths() {
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(5), 3);
    }

    #[test]
    fn parity_runs() {
        let m = parse_machine(bundled::PARITY_TM).unwrap();
        assert!(matches!(simulate_tm(&m, "11", 100).unwrap(), TmOutcome::Accept { .. }));
        assert!(matches!(simulate_tm(&m, "1", 100).unwrap(), TmOutcome::Reject { .. }));
        assert!(matches!(simulate_tm(&m, "", 100).unwrap(), TmOutcome::Accept { .. }));
    }

    #[test]
    fn immediate_accept_takes_one_step() {
        let m = parse_machine(bundled::ACCEPT_TM).unwrap();
        assert_eq!(simulate_tm(&m, "", 10).unwrap(), TmOutcome::Accept { steps: 1 });
    }

    #[test]
    fn spinning_machine_times_out() {
        let m = parse_machine(bundled::LOOP_TM).unwrap();
        assert_eq!(simulate_tm(&m, "", 50).unwrap(), TmOutcome::Timeout);
    }

    #[test]
    fn falling_off_the_tape_is_reported() {
        let text = "states a acc rej\naccept acc\nreject rej\nblank _\nspace 1\nrule (a,_) -> (a,_,L)\n";
        let m = parse_machine(text).unwrap();
        assert!(matches!(simulate_tm(&m, "", 5), Err(Error::SpaceBoundViolation { step: 1, .. })));
    }

    #[test]
    fn circuit_follows_the_simulation() {
        let m = parse_machine(bundled::PARITY_TM).unwrap();
        let inst = tm_to_instance(&m, "11").unwrap();
        assert!(validate_domain(&inst.domain).ok());
        let mut s = inst.domain.initial;
        for _ in 0..10 {
            let succ = inst.domain.successors(s, 0).unwrap();
            assert_eq!(succ.len(), 1);
            assert_eq!(succ[0].1, ratio(1, 1));
            s = succ[0].0;
        }
        assert!(inst.domain.is_goal(s).unwrap());
    }

    #[test]
    fn oversized_encodings_rejected() {
        let mut m = parse_machine(bundled::PARITY_TM).unwrap();
        m.space = 12;
        assert!(matches!(tm_to_instance(&m, ""), Err(Error::CapExceeded { .. })));
    }
}

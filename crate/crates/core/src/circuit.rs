//! Gate-level transition circuits.
//!
//! A [`TransitionCircuit`] reads the bits of a "before" and an "after" state
//! and produces a fixed-point probability: an optional unit bit (weight 1)
//! followed by `m` fraction bits, bit `j` (1-based) weighted `2^-j`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::report::ValidationReport;
use crate::state::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Const0,
    Const1,
    Not,
    And,
    Or,
    Xor,
    InputBefore(usize),
    InputAfter(usize),
}

impl GateKind {
    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
            GateKind::Not => "NOT",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::InputBefore(_) => "INPUT_BEFORE",
            GateKind::InputAfter(_) => "INPUT_AFTER",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, inputs: Vec<usize>) -> Self {
        Gate { kind, inputs }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionCircuit {
    pub name: String,
    pub before_width: usize,
    pub after_width: usize,
    /// Topologically ordered; a gate may only read gates with smaller index.
    pub gates: Vec<Gate>,
    /// Gate carrying the weight-1 bit, if the circuit can output probability 1.
    pub unit: Option<usize>,
    /// Fraction bits, most significant (weight 1/2) first.
    pub output_bits: Vec<usize>,
}

// three-valued logic for partial evaluation
const F: u8 = 0;
const T: u8 = 1;
const X: u8 = 2;

impl TransitionCircuit {
    pub fn fraction_bits(&self) -> usize {
        self.output_bits.len()
    }

    fn check_widths(&self, before: State, after: State) -> Result<()> {
        before.check_width(self.before_width)?;
        after.check_width(self.after_width)
    }

    fn gate_values(&self, before: State, after: State) -> Vec<bool> {
        let mut v: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let value = match gate.kind {
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::Not => !v[gate.inputs[0]],
                GateKind::And => gate.inputs.iter().all(|&i| v[i]),
                GateKind::Or => gate.inputs.iter().any(|&i| v[i]),
                GateKind::Xor => gate.inputs.iter().fold(false, |acc, &i| acc ^ v[i]),
                GateKind::InputBefore(i) => before.get(i),
                GateKind::InputAfter(i) => after.get(i),
            };
            v.push(value);
        }
        v
    }

    fn value_from_bits(&self, bit: impl Fn(usize) -> bool) -> Result<Rational> {
        let m = self.output_bits.len();
        let unit = self.unit.map(&bit).unwrap_or(false);
        let mut numer = BigInt::zero();
        for (j, &g) in self.output_bits.iter().enumerate() {
            if bit(g) {
                numer += BigInt::one() << (m - 1 - j);
            }
        }
        let denom = BigInt::one() << m;
        if unit {
            if !numer.is_zero() {
                return Err(Error::ProbabilityOutOfRange(format!(
                    "1 + {}/{}",
                    numer, denom
                )));
            }
            return Ok(Rational::one());
        }
        Ok(Rational::new(numer, denom))
    }

    /// Exact probability of moving from `before` to `after`.
    pub fn eval(&self, before: State, after: State) -> Result<Rational> {
        self.check_widths(before, after)?;
        let v = self.gate_values(before, after);
        self.value_from_bits(|g| v[g])
    }

    fn tri_eval(&self, gate: &Gate, v: &[u8], before: State, after: State, assigned: usize) -> u8 {
        match gate.kind {
            GateKind::Const0 => F,
            GateKind::Const1 => T,
            GateKind::Not => match v[gate.inputs[0]] {
                X => X,
                b => 1 - b,
            },
            GateKind::And => {
                let mut out = T;
                for &i in &gate.inputs {
                    match v[i] {
                        F => return F,
                        X => out = X,
                        _ => {}
                    }
                }
                out
            }
            GateKind::Or => {
                let mut out = F;
                for &i in &gate.inputs {
                    match v[i] {
                        T => return T,
                        X => out = X,
                        _ => {}
                    }
                }
                out
            }
            GateKind::Xor => {
                let mut acc = F;
                for &i in &gate.inputs {
                    match v[i] {
                        X => return X,
                        b => acc ^= b,
                    }
                }
                acc
            }
            GateKind::InputBefore(i) => before.get(i) as u8,
            GateKind::InputAfter(i) => {
                if i < assigned {
                    after.get(i) as u8
                } else {
                    X
                }
            }
        }
    }

    /// All `after` states with nonzero probability from `before`, in
    /// ascending bit order.
    ///
    /// Candidates are explored bit by bit with three-valued evaluation; a
    /// branch is cut as soon as every output bit is forced to 0. The result is
    /// identical to testing all `2^after_width` candidates.
    pub fn successors(&self, before: State) -> Result<Vec<(State, Rational)>> {
        before.check_width(self.before_width)?;
        let root_after = State::zeros(self.after_width);
        let mut root = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let val = self.tri_eval(gate, &root, before, root_after, 0);
            root.push(val);
        }
        let live: Vec<usize> = (0..self.gates.len()).filter(|&g| root[g] == X).collect();
        let mut out = Vec::new();
        let mut scratch = root.clone();
        self.successors_rec(before, root_after, 0, &root, &live, &mut scratch, &mut out)?;
        out.sort_by_key(|(s, _)| *s);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn successors_rec(
        &self,
        before: State,
        after: State,
        assigned: usize,
        root: &[u8],
        live: &[usize],
        scratch: &mut Vec<u8>,
        out: &mut Vec<(State, Rational)>,
    ) -> Result<()> {
        scratch.copy_from_slice(root);
        for &g in live {
            scratch[g] = self.tri_eval(&self.gates[g], scratch, before, after, assigned);
        }
        let outputs = self.unit.iter().chain(self.output_bits.iter());
        let mut all_zero = true;
        for &g in outputs {
            if scratch[g] != F {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Ok(());
        }
        if assigned == self.after_width {
            let value = self.value_from_bits(|g| scratch[g] == T)?;
            out.push((after, value));
            return Ok(());
        }
        self.successors_rec(before, after.with(assigned, false), assigned + 1, root, live, scratch, out)?;
        self.successors_rec(before, after.with(assigned, true), assigned + 1, root, live, scratch, out)
    }
}

/// Exact dyadic probability computed by `circuit` for the pair of states.
pub fn eval_circuit(circuit: &TransitionCircuit, before: State, after: State) -> Result<Rational> {
    circuit.eval(before, after)
}

/// Structural checks: ordering, arity, input bounds and output bit count.
pub fn validate_circuit(circuit: &TransitionCircuit) -> ValidationReport {
    let mut report = ValidationReport::default();
    let name = &circuit.name;
    for (id, gate) in circuit.gates.iter().enumerate() {
        let arity_ok = match gate.kind {
            GateKind::Const0 | GateKind::Const1 | GateKind::InputBefore(_) | GateKind::InputAfter(_) => {
                gate.inputs.is_empty()
            }
            GateKind::Not => gate.inputs.len() == 1,
            GateKind::And | GateKind::Or | GateKind::Xor => gate.inputs.len() >= 2,
        };
        if !arity_ok {
            report.defect(format!(
                "{name}: gate {id} ({}) has {} input(s)",
                gate.kind.keyword(),
                gate.inputs.len()
            ));
        }
        for &input in &gate.inputs {
            if input >= id {
                report.defect(format!("{name}: gate {id} reads gate {input}, which is not defined earlier"));
            }
        }
        match gate.kind {
            GateKind::InputBefore(i) if i >= circuit.before_width => {
                report.defect(format!("{name}: gate {id} reads before-bit {i} of {}", circuit.before_width));
            }
            GateKind::InputAfter(i) if i >= circuit.after_width => {
                report.defect(format!("{name}: gate {id} reads after-bit {i} of {}", circuit.after_width));
            }
            _ => {}
        }
    }
    if circuit.output_bits.is_empty() {
        report.defect(format!("{name}: no output bits"));
    }
    for &g in circuit.unit.iter().chain(circuit.output_bits.iter()) {
        if g >= circuit.gates.len() {
            report.defect(format!("{name}: output references undefined gate {g}"));
        }
    }
    report
}

/// Incremental circuit construction with constant folding and structural
/// hashing. Wires are gate indices.
#[derive(Debug)]
pub struct CircuitBuilder {
    before_width: usize,
    after_width: usize,
    gates: Vec<Gate>,
    memo: HashMap<Gate, usize>,
}

pub type Wire = usize;

impl CircuitBuilder {
    pub fn new(before_width: usize, after_width: usize) -> Self {
        CircuitBuilder {
            before_width,
            after_width,
            gates: Vec::new(),
            memo: HashMap::new(),
        }
    }

    fn push(&mut self, gate: Gate) -> Wire {
        if let Some(&w) = self.memo.get(&gate) {
            return w;
        }
        let w = self.gates.len();
        self.gates.push(gate.clone());
        self.memo.insert(gate, w);
        w
    }

    fn constant_of(&self, w: Wire) -> Option<bool> {
        match self.gates[w].kind {
            GateKind::Const0 => Some(false),
            GateKind::Const1 => Some(true),
            _ => None,
        }
    }

    pub fn constant(&mut self, value: bool) -> Wire {
        let kind = if value { GateKind::Const1 } else { GateKind::Const0 };
        self.push(Gate::new(kind, vec![]))
    }

    pub fn before(&mut self, i: usize) -> Wire {
        assert!(i < self.before_width);
        self.push(Gate::new(GateKind::InputBefore(i), vec![]))
    }

    pub fn after(&mut self, i: usize) -> Wire {
        assert!(i < self.after_width);
        self.push(Gate::new(GateKind::InputAfter(i), vec![]))
    }

    pub fn not(&mut self, a: Wire) -> Wire {
        if let Some(c) = self.constant_of(a) {
            return self.constant(!c);
        }
        if self.gates[a].kind == GateKind::Not {
            return self.gates[a].inputs[0];
        }
        self.push(Gate::new(GateKind::Not, vec![a]))
    }

    fn nary(&mut self, kind: GateKind, inputs: &[Wire]) -> Wire {
        let (absorbing, identity) = match kind {
            GateKind::And => (false, true),
            GateKind::Or => (true, false),
            _ => unreachable!(),
        };
        let mut kept: Vec<Wire> = Vec::with_capacity(inputs.len());
        for &w in inputs {
            match self.constant_of(w) {
                Some(c) if c == absorbing => return self.constant(absorbing),
                Some(_) => {}
                None => {
                    if !kept.contains(&w) {
                        kept.push(w);
                    }
                }
            }
        }
        match kept.len() {
            0 => self.constant(identity),
            1 => kept[0],
            _ => {
                kept.sort_unstable();
                self.push(Gate::new(kind, kept))
            }
        }
    }

    pub fn and(&mut self, inputs: &[Wire]) -> Wire {
        self.nary(GateKind::And, inputs)
    }

    pub fn or(&mut self, inputs: &[Wire]) -> Wire {
        self.nary(GateKind::Or, inputs)
    }

    pub fn xor(&mut self, a: Wire, b: Wire) -> Wire {
        match (self.constant_of(a), self.constant_of(b)) {
            (Some(x), Some(y)) => self.constant(x ^ y),
            (Some(false), None) => b,
            (None, Some(false)) => a,
            (Some(true), None) => self.not(b),
            (None, Some(true)) => self.not(a),
            (None, None) if a == b => self.constant(false),
            (None, None) => {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                self.push(Gate::new(GateKind::Xor, vec![lo, hi]))
            }
        }
    }

    pub fn equiv(&mut self, a: Wire, b: Wire) -> Wire {
        let x = self.xor(a, b);
        self.not(x)
    }

    /// `if sel { a } else { b }`
    pub fn mux(&mut self, sel: Wire, a: Wire, b: Wire) -> Wire {
        let nsel = self.not(sel);
        let left = self.and(&[sel, a]);
        let right = self.and(&[nsel, b]);
        self.or(&[left, right])
    }

    /// Ripple-carry sum of two little-endian bit vectors of equal length;
    /// the final carry is dropped.
    pub fn add(&mut self, a: &[Wire], b: &[Wire]) -> Vec<Wire> {
        assert_eq!(a.len(), b.len());
        let mut carry = self.constant(false);
        let mut out = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let xy = self.xor(x, y);
            out.push(self.xor(xy, carry));
            let both = self.and(&[x, y]);
            let prop = self.and(&[carry, xy]);
            carry = self.or(&[both, prop]);
        }
        out
    }

    /// Builds the circuit. `value` is little-endian fixed point with
    /// `fraction_bits` bits below the binary point; any bits above it beyond
    /// the unit bit must be absent.
    pub fn finish(mut self, name: impl Into<String>, value: &[Wire], fraction_bits: usize) -> TransitionCircuit {
        assert!(fraction_bits >= 1);
        assert!(value.len() <= fraction_bits + 1);
        let zero = self.constant(false);
        let bit = |k: usize| value.get(k).copied().unwrap_or(zero);
        let output_bits: Vec<Wire> = (1..=fraction_bits).map(|j| bit(fraction_bits - j)).collect();
        let unit_wire = bit(fraction_bits);
        let unit = if self.constant_of(unit_wire) == Some(false) {
            None
        } else {
            Some(unit_wire)
        };
        TransitionCircuit {
            name: name.into(),
            before_width: self.before_width,
            after_width: self.after_width,
            gates: self.gates,
            unit,
            output_bits,
        }
    }
}

//! The example files shipped in `assets/`, compiled into the library.

use crate::circuit::TransitionCircuit;
use crate::domain::PlanningDomain;
use crate::dsl::{parse_circuit, parse_dimacs, parse_domain, parse_machine, parse_observations, parse_plan, CnfFormula};
use crate::plans::{Observation, Plan};
use crate::reductions::TuringMachineSpec;

pub const SANDCASTLE_PPD: &str = include_str!("../../../assets/sandcastle.ppd");
pub const ERECT_CASTLE_PPC: &str = include_str!("../../../assets/erect-castle.ppc");
pub const FIG2A_PPL: &str = include_str!("../../../assets/fig2a.ppl");
pub const FIG2B_PPL: &str = include_str!("../../../assets/fig2b.ppl");
pub const FIG2C_PPL: &str = include_str!("../../../assets/fig2c.ppl");
pub const FIG2D_PPL: &str = include_str!("../../../assets/fig2d.ppl");
pub const MOAT_OBS: &str = include_str!("../../../assets/moat.obs");
pub const DEMO_CNF: &str = include_str!("../../../assets/demo.cnf");
pub const PARITY_TM: &str = include_str!("../../../assets/parity.tm");
pub const ACCEPT_TM: &str = include_str!("../../../assets/accept.tm");
pub const REJECT_TM: &str = include_str!("../../../assets/reject.tm");
pub const INCREMENT_TM: &str = include_str!("../../../assets/increment.tm");
pub const COUNTDOWN_TM: &str = include_str!("../../../assets/countdown.tm");
pub const LOOP_TM: &str = include_str!("../../../assets/loop.tm");

/// Every bundled file as `(file name, contents)`.
pub const FILES: &[(&str, &str)] = &[
    ("sandcastle.ppd", SANDCASTLE_PPD),
    ("erect-castle.ppc", ERECT_CASTLE_PPC),
    ("fig2a.ppl", FIG2A_PPL),
    ("fig2b.ppl", FIG2B_PPL),
    ("fig2c.ppl", FIG2C_PPL),
    ("fig2d.ppl", FIG2D_PPL),
    ("moat.obs", MOAT_OBS),
    ("demo.cnf", DEMO_CNF),
    ("parity.tm", PARITY_TM),
    ("accept.tm", ACCEPT_TM),
    ("reject.tm", REJECT_TM),
    ("increment.tm", INCREMENT_TM),
    ("countdown.tm", COUNTDOWN_TM),
    ("loop.tm", LOOP_TM),
];

pub fn sandcastle() -> PlanningDomain {
    parse_domain(SANDCASTLE_PPD).expect("bundled domain parses")
}

pub fn erect_castle_circuit() -> TransitionCircuit {
    parse_circuit(ERECT_CASTLE_PPC).expect("bundled circuit parses")
}

fn plan(text: &str) -> Plan {
    parse_plan(text).expect("bundled plan parses")
}

pub fn fig2a() -> Plan {
    plan(FIG2A_PPL)
}

pub fn fig2b() -> Plan {
    plan(FIG2B_PPL)
}

pub fn fig2c() -> Plan {
    plan(FIG2C_PPL)
}

pub fn fig2d() -> Plan {
    plan(FIG2D_PPL)
}

pub fn moat_observations() -> (Vec<String>, Vec<Observation>) {
    parse_observations(MOAT_OBS).expect("bundled observations parse")
}

pub fn demo_cnf() -> CnfFormula {
    parse_dimacs(DEMO_CNF).expect("bundled formula parses")
}

/// The bundled machines by file stem.
pub fn machines() -> Vec<(&'static str, TuringMachineSpec)> {
    [
        ("accept", ACCEPT_TM),
        ("reject", REJECT_TM),
        ("parity", PARITY_TM),
        ("increment", INCREMENT_TM),
        ("countdown", COUNTDOWN_TM),
        ("loop", LOOP_TM),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_machine(text).expect("bundled machine parses")))
    .collect()
}

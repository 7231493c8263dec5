//! Exact evaluation and search for probabilistic propositional planning.
//!
//! Domains are sets of boolean state variables with actions given as flat
//! tables, probabilistic state-space operators, or transition circuits. Plans
//! come in four classes (totally ordered, acyclic, looping, partially
//! ordered) and are evaluated with exact rational arithmetic.
//!
//! ```
//! use ppeval::{bundled, eval::eval_plan, eval::Interpretation, rational::ratio};
//!
//! let domain = bundled::sandcastle();
//! let result = eval_plan(&domain, &bundled::fig2a(), Interpretation::Average).unwrap();
//! assert_eq!(result.value, ratio(7, 16));
//! ```

pub mod bundled;
pub mod circuit;
pub mod domain;
pub mod dsl;
pub mod error;
pub mod eval;
pub mod formula;
pub mod linsolve;
pub mod par;
pub mod plans;
pub mod rational;
pub mod reductions;
pub mod report;
pub mod search;
pub mod simulate;
pub mod state;
pub mod synth;

pub use domain::{is_goal, successor_distribution, transition_prob, validate_domain, Backend, PlanningDomain};
pub use error::{Error, ParseError, Result};
pub use eval::{eval_plan, meets_threshold, EvaluationResult, Interpretation};
pub use plans::{validate_plan, Plan};
pub use rational::Rational;
pub use report::ValidationReport;
pub use state::State;

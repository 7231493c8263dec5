//! Text formats: domains (`.ppd`), circuits (`.ppc`), plans (`.ppl`),
//! Turing machines (`.tm`) and DIMACS CNF, plus the PSO-to-circuit compiler.
//!
//! All formats are line oriented; `#` starts a comment that runs to the end
//! of the line. Probabilities are written as `p/q` or finite decimals.

mod circuit;
mod compile;
mod dimacs;
mod domain;
mod machine;
mod plan;

pub use circuit::{parse_circuit, print_circuit};
pub use compile::{compile_pso_to_circuit, compile_operator};
pub use dimacs::{parse_dimacs, print_dimacs, CnfFormula};
pub use domain::{circuit_file_name, parse_domain, parse_domain_with, print_domain};
pub use machine::{parse_machine, print_machine};
pub use plan::{parse_observations, parse_plan, print_observations, print_plan};

use crate::error::ParseError;
use crate::formula::{is_ident_char, is_ident_start};

/// A non-empty source line with comments stripped.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Line<'a> {
    pub number: usize,
    /// 1-based column of `text` within the original line.
    pub column: usize,
    pub text: &'a str,
}

impl<'a> Line<'a> {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.number, self.column, message)
    }

    /// Error located at `sub`, which must be a subslice of `self.text`.
    pub fn error_at(&self, sub: &str, message: impl Into<String>) -> ParseError {
        let offset = (sub.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize);
        let offset = offset.min(self.text.len());
        ParseError::new(self.number, self.column + offset, message)
    }

    /// Column of `sub` within the original line.
    pub fn column_of(&self, sub: &str) -> usize {
        let offset = (sub.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize);
        self.column + offset.min(self.text.len())
    }

    /// Splits off the first whitespace-delimited word.
    pub fn keyword(&self) -> (&'a str, &'a str) {
        match self.text.find(char::is_whitespace) {
            Some(i) => (&self.text[..i], self.text[i..].trim_start()),
            None => (self.text, ""),
        }
    }
}

pub(crate) fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let uncommented = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed_start = uncommented.trim_start();
        let column = uncommented.len() - trimmed_start.len() + 1;
        let text = trimmed_start.trim_end();
        (!text.is_empty()).then_some(Line {
            number: i + 1,
            column,
            text,
        })
    })
}

pub(crate) fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char)
}

pub(crate) fn expect_identifier<'a>(line: &Line<'a>, word: &'a str, what: &str) -> Result<&'a str, ParseError> {
    if is_identifier(word) {
        Ok(word)
    } else if word.is_empty() {
        Err(line.error(format!("expected {what}")))
    } else {
        Err(line.error_at(word, format!("invalid {what} `{word}`")))
    }
}

//! Boolean conditions over state variables.
//!
//! Formulas are parsed with variable names ([`Formula`]) and bound to variable
//! indices ([`Condition`]) against a concrete variable list before use.
//! Syntax: `true`, `false`, identifiers, `!`, `&`, `|` and parentheses, with
//! the usual precedence `!` > `&` > `|`.

use std::fmt;

use crate::error::{Error, ParseError, Result};
use crate::state::State;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<V> {
    True,
    False,
    Var(V),
    Not(Box<Expr<V>>),
    And(Vec<Expr<V>>),
    Or(Vec<Expr<V>>),
}

pub type Formula = Expr<String>;
pub type Condition = Expr<usize>;

impl Formula {
    pub fn bind(&self, variables: &[String]) -> Result<Condition> {
        Ok(match self {
            Expr::True => Expr::True,
            Expr::False => Expr::False,
            Expr::Var(name) => Expr::Var(
                variables
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?,
            ),
            Expr::Not(inner) => Expr::Not(Box::new(inner.bind(variables)?)),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.bind(variables)).collect::<Result<_>>()?),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.bind(variables)).collect::<Result<_>>()?),
        })
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(name) => out.push(name),
            Expr::Not(inner) => inner.collect_vars(out),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::True | Expr::False => {}
        }
    }
}

impl Condition {
    pub fn eval(&self, state: State) -> bool {
        match self {
            Expr::True => true,
            Expr::False => false,
            Expr::Var(i) => state.get(*i),
            Expr::Not(inner) => !inner.eval(state),
            Expr::And(xs) => xs.iter().all(|x| x.eval(state)),
            Expr::Or(xs) => xs.iter().any(|x| x.eval(state)),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Not(inner) => inner.max_var(),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().filter_map(|x| x.max_var()).max(),
            Expr::True | Expr::False => None,
        }
    }

    pub fn unbind(&self, variables: &[String]) -> Formula {
        match self {
            Expr::True => Expr::True,
            Expr::False => Expr::False,
            Expr::Var(i) => Expr::Var(variables[*i].clone()),
            Expr::Not(inner) => Expr::Not(Box::new(inner.unbind(variables))),
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.unbind(variables)).collect()),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.unbind(variables)).collect()),
        }
    }
}

impl<V> Expr<V> {
    pub fn is_true(&self) -> bool {
        matches!(self, Expr::True)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, e: &Formula) -> fmt::Result {
            match e {
                Expr::And(_) | Expr::Or(_) => write!(f, "({e})"),
                _ => write!(f, "{e}"),
            }
        }
        match self {
            Expr::True => f.write_str("true"),
            Expr::False => f.write_str("false"),
            Expr::Var(name) => f.write_str(name),
            Expr::Not(inner) => match **inner {
                Expr::And(_) | Expr::Or(_) => write!(f, "!({inner})"),
                _ => write!(f, "!{inner}"),
            },
            Expr::And(xs) | Expr::Or(xs) => {
                let and = matches!(self, Expr::And(_));
                let sep = if and { " & " } else { " | " };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // nested groups are always parenthesized so re-parsing
                    // yields the same tree
                    child(f, x)?;
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')
}

/// Parses a formula; `line` and `column` locate `text` in its source file.
pub fn parse_formula(text: &str, line: usize, column: usize) -> Result<Formula, ParseError> {
    let mut p = FormulaParser {
        chars: text.char_indices().collect(),
        pos: 0,
        line,
        column,
        len: text.len(),
    };
    let f = p.parse_or()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("unexpected trailing input in formula"));
    }
    Ok(f)
}

struct FormulaParser {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    column: usize,
    len: usize,
}

impl FormulaParser {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(o, _)| o).unwrap_or(self.len)
    }

    fn error(&self, message: &str) -> ParseError {
        ParseError::new(self.line, self.column + self.offset(), message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn parse_or(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.parse_and()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            items.push(self.parse_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn parse_and(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.parse_unary()?];
        while self.peek() == Some('&') {
            self.pos += 1;
            items.push(self.parse_unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn parse_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.parse_unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.parse_or()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if is_ident_start(c) => {
                let mut name = String::new();
                while let Some(&(_, c)) = self.chars.get(self.pos) {
                    if !is_ident_char(c) {
                        break;
                    }
                    name.push(c);
                    self.pos += 1;
                }
                Ok(match name.as_str() {
                    "true" => Expr::True,
                    "false" => Expr::False,
                    _ => Expr::Var(name),
                })
            }
            Some(_) => Err(self.error("expected a variable, `true`, `false`, `!` or `(`")),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}

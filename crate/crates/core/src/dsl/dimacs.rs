use std::fmt::Write as _;

use crate::error::{ParseError, Result};

/// A CNF formula in DIMACS convention: literal `k` is variable `|k|`
/// (1-based), negated when `k < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    /// `assignment` bit `i` is the value of variable `i + 1`.
    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = (assignment >> (lit.unsigned_abs() - 1)) & 1 == 1;
                value == (lit > 0)
            })
        })
    }
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut last_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(ParseError::new(line_no, 1, "duplicate problem line").into());
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.as_slice() {
                ["cnf", n, m] => {
                    let n = n.parse().map_err(|_| ParseError::new(line_no, 1, "bad variable count"))?;
                    let m = m.parse().map_err(|_| ParseError::new(line_no, 1, "bad clause count"))?;
                    header = Some((n, m));
                }
                _ => return Err(ParseError::new(line_no, 1, "expected `p cnf VARS CLAUSES`").into()),
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(ParseError::new(line_no, 1, "clause before the `p cnf` header").into());
        };
        for word in line.split_whitespace() {
            let column = raw.find(word).map_or(1, |c| c + 1);
            let lit: i64 = word
                .parse()
                .map_err(|_| ParseError::new(line_no, column, format!("bad literal `{word}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(ParseError::new(
                        line_no,
                        column,
                        format!("literal {lit} references a variable beyond {n}"),
                    )
                    .into());
                }
                current.push(lit);
            }
        }
    }
    let (num_vars, num_clauses) = header.ok_or_else(|| ParseError::new(1, 1, "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(ParseError::new(last_line, 1, "last clause is not terminated by 0").into());
    }
    if clauses.len() != num_clauses {
        return Err(ParseError::new(
            last_line,
            1,
            format!("header declares {num_clauses} clauses, found {}", clauses.len()),
        )
        .into());
    }
    Ok(CnfFormula { num_vars, clauses })
}

pub fn print_dimacs(formula: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", formula.num_vars, formula.clauses.len());
    for clause in &formula.clauses {
        for lit in clause {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

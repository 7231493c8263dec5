//! Exact sparse linear solves by fraction-free (Bareiss) elimination.
//!
//! Rows are scaled to integers, eliminated with exact integer division by the
//! previous pivot, and finished by rational back substitution.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub pivots: usize,
    pub row_swaps: usize,
}

type IntRow = BTreeMap<usize, BigInt>;

fn to_integer_row(row: &SparseRow, rhs: &Rational, n: usize) -> IntRow {
    let mut lcm = rhs.denom().clone();
    for (_, v) in row {
        lcm = lcm.lcm(v.denom());
    }
    let mut out = IntRow::new();
    for (col, v) in row {
        let scaled = v.numer() * (&lcm / v.denom());
        let e = out.entry(*col).or_insert_with(BigInt::zero);
        *e += scaled;
    }
    let r = rhs.numer() * (&lcm / rhs.denom());
    out.insert(n, r);
    out.retain(|_, v| !v.is_zero());
    out
}

/// Solves `A x = b` for square `A` given as sparse rows.
pub fn solve(rows: &[SparseRow], rhs: &[Rational]) -> Result<(Vec<Rational>, SolveStats)> {
    let n = rows.len();
    assert_eq!(rhs.len(), n);
    let mut m: Vec<IntRow> = rows.iter().zip(rhs).map(|(r, b)| to_integer_row(r, b, n)).collect();
    let mut stats = SolveStats::default();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| m[i].contains_key(&k)).ok_or(Error::Singular)?;
        if p != k {
            m.swap(p, k);
            stats.row_swaps += 1;
        }
        stats.pivots += 1;
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pivot = pivot_row[&k].clone();
        for row in tail.iter_mut() {
            match row.remove(&k) {
                None => {
                    if pivot != prev {
                        for v in row.values_mut() {
                            *v = &*v * &pivot / &prev;
                        }
                    }
                }
                Some(factor) => {
                    let mut updated = IntRow::new();
                    for (&col, v) in row.iter() {
                        updated.insert(col, v * &pivot);
                    }
                    for (&col, v) in pivot_row.range(k + 1..) {
                        let e = updated.entry(col).or_insert_with(BigInt::zero);
                        *e -= &factor * v;
                    }
                    updated.retain(|_, v| !v.is_zero());
                    for v in updated.values_mut() {
                        debug_assert!((&*v % &prev).is_zero());
                        *v = &*v / &prev;
                    }
                    *row = updated;
                }
            }
        }
        prev = pivot;
    }
    let mut x = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let row = &m[k];
        let mut acc = Rational::from_integer(row.get(&n).cloned().unwrap_or_default());
        for (&col, v) in row.range(k + 1..n) {
            acc -= &x[col] * Rational::from_integer(v.clone());
        }
        x[k] = acc / Rational::from_integer(row[&k].clone());
    }
    Ok((x, stats))
}

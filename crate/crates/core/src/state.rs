use std::fmt;

use crate::error::{Error, Result};

/// Widest state representable; bit `i` holds the `i`-th declared variable.
pub const MAX_WIDTH: usize = 64;

/// A full assignment to the domain's boolean variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: u64,
    width: u8,
}

impl State {
    pub fn new(bits: u64, width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "state width {width} exceeds {MAX_WIDTH}");
        let mask = mask(width);
        State {
            bits: bits & mask,
            width: width as u8,
        }
    }

    pub fn zeros(width: usize) -> Self {
        State::new(0, width)
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        State::new(bits, values.len())
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    pub fn get(self, var: usize) -> bool {
        debug_assert!(var < self.width());
        (self.bits >> var) & 1 == 1
    }

    pub fn with(self, var: usize, value: bool) -> Self {
        debug_assert!(var < self.width());
        let bits = if value {
            self.bits | (1 << var)
        } else {
            self.bits & !(1 << var)
        };
        State { bits, width: self.width }
    }

    pub fn check_width(self, expected: usize) -> Result<()> {
        if self.width() == expected {
            Ok(())
        } else {
            Err(Error::WidthMismatch {
                expected,
                found: self.width(),
            })
        }
    }

    /// Every state of the given width in ascending bit order.
    pub fn all(width: usize) -> impl Iterator<Item = State> {
        assert!(width < MAX_WIDTH);
        (0..(1u64 << width)).map(move |bits| State::new(bits, width))
    }
}

fn mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl fmt::Display for State {
    /// Bits in declaration order, first variable leftmost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.width() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_zero_is_first_variable() {
        let s = State::from_bools(&[true, false]);
        assert_eq!(s.bits(), 1);
        assert!(s.get(0));
        assert_eq!(s.to_string(), "[10]");
        assert_eq!(s.with(1, true).bits(), 3);
    }

    #[test]
    fn width_checks() {
        let s = State::zeros(3);
        assert!(s.check_width(3).is_ok());
        assert!(matches!(
            s.check_width(2),
            Err(Error::WidthMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn excess_bits_are_masked() {
        assert_eq!(State::new(0b1111, 2).bits(), 0b11);
        assert_eq!(State::all(2).count(), 4);
    }
}

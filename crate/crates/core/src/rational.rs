//! Exact probability arithmetic.
//!
//! Every probability in the toolkit is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms. Literals are accepted either as `p/q` or as
//! finite decimals and are converted without ever passing through a float.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `2^-k` exactly.
pub fn dyadic_unit(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

pub fn is_probability(value: &Rational) -> bool {
    !value.is_negative() && *value <= one()
}

/// Returns `k` such that the denominator of `value` is `2^k`, or `None` when
/// the value is not dyadic.
pub fn dyadic_exponent(value: &Rational) -> Option<u32> {
    let denom = value.denom();
    if denom.is_zero() {
        return None;
    }
    let bits = denom.trailing_zeros().unwrap_or(0);
    if (denom >> bits) == BigInt::one() {
        Some(bits as u32)
    } else {
        None
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.4375`.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = parse_integer(num)?;
        let den: BigInt = parse_integer(den)?;
        if den.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("malformed number `{text}`"));
    }
    let digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !digits(int_part) || !digits(frac_part) {
        return Err(format!("malformed number `{text}`"));
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| format!("malformed number `{text}`"))?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

fn parse_integer(s: &str) -> Result<BigInt, String> {
    let s = s.trim();
    if s.is_empty() || !s.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("malformed integer `{s}`"));
    }
    s.parse().map_err(|_| format!("malformed integer `{s}`"))
}

/// Always `p/q`, including `0/1` and `1/1`.
pub fn format_exact(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Decimal rounded half away from zero to `places` digits, computed exactly.
pub fn format_decimal(value: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = value * Rational::from_integer(scale.clone());
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = r.abs() * 2;
    let mut rounded = q;
    if twice >= *scaled.denom() {
        rounded += if scaled.numer().sign() == Sign::Minus { -1 } else { 1 };
    }
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("7/16").unwrap(), ratio(7, 16));
        assert_eq!(parse_rational("0.4375").unwrap(), ratio(7, 16));
        assert_eq!(parse_rational("1").unwrap(), one());
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.4e3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn lowest_terms_are_unique() {
        let a = ratio(1, 6) + ratio(1, 3);
        assert_eq!(a, ratio(1, 2));
        assert_eq!(format_exact(&a), "1/2");
    }

    #[test]
    fn decimal_formatting_rounds_exactly() {
        assert_eq!(format_decimal(&ratio(7, 16), 6), "0.437500");
        assert_eq!(format_decimal(&ratio(1, 3), 6), "0.333333");
        assert_eq!(format_decimal(&ratio(2, 3), 6), "0.666667");
        assert_eq!(format_decimal(&one(), 6), "1.000000");
        assert_eq!(format_decimal(&zero(), 2), "0.00");
    }

    #[test]
    fn dyadic_detection() {
        assert_eq!(dyadic_exponent(&ratio(3, 8)), Some(3));
        assert_eq!(dyadic_exponent(&one()), Some(0));
        assert_eq!(dyadic_exponent(&ratio(1, 3)), None);
        assert_eq!(dyadic_exponent(&ratio(1, 6)), None);
    }
}

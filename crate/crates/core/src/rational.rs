//! Exact rational helpers shared by every module.
//!
//! Costs, budgets and model coefficients are stored as [`Rational`]
//! (arbitrary precision). Conversion to `f64` happens only when a model is
//! handed to the floating-point simplex.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `max(v, 0)`.
pub fn pos(v: &Rational) -> Rational {
    if v.is_positive() {
        v.clone()
    } else {
        Rational::zero()
    }
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn is_integral(v: &Rational) -> bool {
    v.is_integer()
}

/// Canonical text form: `7`, `-3`, `11/2` (always reduced).
pub fn format(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn canonical_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

/// Parses the canonical token grammar `-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?`.
pub fn parse(token: &str) -> Option<Rational> {
    let (neg, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    if !canonical_digits(num) {
        return None;
    }
    let mut numer: BigInt = num.parse().ok()?;
    if neg {
        numer = -numer;
    }
    let denom: BigInt = match den {
        Some(d) => {
            if !canonical_digits(d) || d == "0" {
                return None;
            }
            d.parse().ok()?
        }
        None => BigInt::one(),
    };
    Some(Rational::new(numer, denom))
}

/// Parses an integer token (rejects fractions and leading zeros).
pub fn parse_integer(token: &str) -> Option<Rational> {
    if token.contains('/') {
        return None;
    }
    parse(token)
}

/// Best rational approximation of `v` with denominator at most `max_den`,
/// accepted when it is within `1e-9 * max(1, |v|)`; otherwise `v` is
/// rounded to nine decimals.
pub fn snap_f64(v: f64, max_den: u64) -> Rational {
    let tol = 1e-9 * v.abs().max(1.0);
    let rounded = v.round();
    if (v - rounded).abs() <= tol {
        return Rational::from_integer(BigInt::from(rounded as i128));
    }
    // continued fraction convergents h/k
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 || k2 <= 0 {
            break;
        }
        if ((h2 as f64) / (k2 as f64) - v).abs() <= tol {
            return Rational::new(BigInt::from(h2), BigInt::from(k2));
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = x - a;
        if frac.abs() < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    let scaled = (v * 1e9).round() as i128;
    Rational::new(BigInt::from(scaled), BigInt::from(1_000_000_000i64))
}

/// Floor of a non-negative rational as `usize`.
pub fn floor_usize(v: &Rational) -> usize {
    v.numer().div_floor(v.denom()).to_usize().unwrap_or(0)
}

pub fn from_usize(v: usize) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_are_inverse_on_canonical_tokens() {
        for tok in ["0", "7", "-3", "11/2", "100", "-5/3"] {
            let v = parse(tok).unwrap();
            assert_eq!(format(&v), tok);
        }
    }

    #[test]
    fn parse_rejects_non_canonical() {
        for tok in ["", "007", "1.5", "+3", "3/0", "a", "1/02", "--1", " 1"] {
            assert!(parse(tok).is_none(), "{tok:?}");
        }
        assert!(parse_integer("3/2").is_none());
    }

    #[test]
    fn snap_recovers_small_fractions() {
        assert_eq!(snap_f64(5.5000000001, 10_000), ratio(11, 2));
        assert_eq!(snap_f64(6.0 - 1e-12, 10_000), int(6));
        assert_eq!(snap_f64(1.0 / 3.0, 10_000), ratio(1, 3));
        assert_eq!(snap_f64(-2.25, 10_000), ratio(-9, 4));
    }

    #[test]
    fn floor_of_fraction() {
        assert_eq!(floor_usize(&ratio(7, 2)), 3);
        assert_eq!(floor_usize(&int(4)), 4);
    }
}

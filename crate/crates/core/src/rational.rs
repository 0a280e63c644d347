//! Exact rational numbers and their textual encodings.
//!
//! Rationals travel through files as `"p/q"` strings (or plain integers and
//! terminating decimals). Human-facing output pairs the exact value with a
//! 12-significant-digit decimal rendering rounded half to even.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a rational number")]
pub struct ParseRationalError(pub String);

/// Shorthand for `p/q` with machine integers.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"`, `"p"`, and decimal forms such as `"1.25"` or `"2.5e-3"`
/// exactly. Decimal notation is never routed through `f64`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let shift = exponent - frac_part.len() as i64;
    let scale = pow10(shift.unsigned_abs());
    if shift >= 0 {
        value *= Rational::from_integer(scale);
    } else {
        value /= Rational::from_integer(scale);
    }
    Some(if negative { -value } else { value })
}

fn pow10(exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(10), exp as usize)
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn to_exact_string(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering with exactly 12 significant digits, ties to even.
pub fn to_decimal_string(value: &Rational) -> String {
    to_significant(value, 12)
}

pub fn to_significant(value: &Rational, digits: u32) -> String {
    assert!(digits >= 1);
    if value.is_zero() {
        return format!("0.{}", "0".repeat(digits as usize - 1));
    }
    let negative = value.is_negative();
    let abs = value.abs();
    let mut exponent = decimal_exponent(&abs);
    let mut mantissa = round_half_even(&(abs.clone() * pow10_signed(digits as i64 - 1 - exponent)));
    if mantissa >= pow10(digits as u64) {
        // Rounding carried into a new leading digit.
        exponent += 1;
        mantissa = round_half_even(&(abs * pow10_signed(digits as i64 - 1 - exponent)));
    }
    let text = mantissa.to_string();
    let body = if (-7..21).contains(&exponent) {
        place_point(&text, exponent)
    } else {
        let (head, tail) = text.split_at(1);
        if tail.is_empty() {
            format!("{head}e{exponent}")
        } else {
            format!("{head}.{tail}e{exponent}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn place_point(digits: &str, exponent: i64) -> String {
    if exponent < 0 {
        format!("0.{}{}", "0".repeat((-exponent - 1) as usize), digits)
    } else {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    }
}

fn pow10_signed(exp: i64) -> Rational {
    let p = Rational::from_integer(pow10(exp.unsigned_abs()));
    if exp >= 0 {
        p
    } else {
        p.recip()
    }
}

/// floor(log10(value)) for a positive rational.
fn decimal_exponent(value: &Rational) -> i64 {
    let mut e = value.numer().to_string().len() as i64 - value.denom().to_string().len() as i64;
    while *value < pow10_signed(e) {
        e -= 1;
    }
    while *value >= pow10_signed(e + 1) {
        e += 1;
    }
    e
}

pub fn round_half_even(value: &Rational) -> BigInt {
    let floor = value.floor();
    let frac = value - &floor;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let base = floor.to_integer();
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => base,
        std::cmp::Ordering::Greater => base + 1,
        std::cmp::Ordering::Equal => {
            if base.is_even() {
                base
            } else {
                base + 1
            }
        }
    }
}

/// Exact conversion of a finite float. Returns `None` for NaN and infinities.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Writes `value` as a terminating decimal when it has one, i.e. when the
/// reduced denominator has no prime factors besides 2 and 5.
pub fn to_terminating_decimal(value: &Rational) -> Option<String> {
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut places = 0u64;
    let (mut twos, mut fives) = (0u64, 0u64);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    places = places.max(twos).max(fives);
    let scaled = (value * Rational::from_integer(pow10(places))).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let body = if places == 0 {
        digits
    } else {
        let places = places as usize;
        let padded = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        format!("{int_part}.{frac_part}")
    };
    Some(if negative { format!("-{body}") } else { body })
}

/// Exact and decimal renderings side by side, e.g. `7/10 (0.700000000000)`.
pub struct Both<'a>(pub &'a Rational);

impl fmt::Display for Both<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", to_exact_string(self.0), to_decimal_string(self.0))
    }
}

//! Fixed-point amounts.
//!
//! Every amount is stored as a signed integer count of `10^-digits` units,
//! where `digits` is fixed per instance. All solver arithmetic happens on
//! these integers; floats never touch match validation.

use thiserror::Error;

/// Integer units of an amount at some fixed number of decimal digits.
pub type Amount = i64;

/// Largest supported number of decimal digits. 10^18 still fits in i64.
pub const MAX_DIGITS: u32 = 18;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseAmountError {
    #[error("empty amount")]
    Empty,
    #[error("invalid character {0:?} in amount")]
    InvalidChar(char),
    #[error("{text:?} has more than {digits} fractional digits")]
    TooPrecise { text: String, digits: u32 },
    #[error("amount {0:?} out of range")]
    OutOfRange(String),
}

pub fn pow10(digits: u32) -> i64 {
    debug_assert!(digits <= MAX_DIGITS);
    10i64.pow(digits)
}

/// Parse a decimal numeral like `-12.05` into units at `digits` decimal
/// digits. Numerals with more fractional digits than `digits` are rejected
/// rather than silently rounded.
pub fn parse_amount(text: &str, digits: u32) -> Result<Amount, ParseAmountError> {
    assert!(digits <= MAX_DIGITS, "digits {digits} over limit");
    let text = text.trim();
    let (neg, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseAmountError::Empty);
    }
    if frac_part.len() > digits as usize {
        // Trailing zeros beyond `digits` are still exact; only reject real precision.
        let (keep, extra) = frac_part.split_at(digits as usize);
        if extra.bytes().any(|b| b != b'0') {
            return Err(ParseAmountError::TooPrecise { text: text.to_string(), digits });
        }
        return parse_parts(text, neg, int_part, keep, digits);
    }
    parse_parts(text, neg, int_part, frac_part, digits)
}

fn parse_parts(
    orig: &str,
    neg: bool,
    int_part: &str,
    frac_part: &str,
    digits: u32,
) -> Result<Amount, ParseAmountError> {
    let mut units: i128 = 0;
    for c in int_part.chars() {
        let d = c.to_digit(10).ok_or(ParseAmountError::InvalidChar(c))?;
        units = units * 10 + d as i128;
        if units > i64::MAX as i128 {
            return Err(ParseAmountError::OutOfRange(orig.to_string()));
        }
    }
    units *= pow10(digits) as i128;
    let mut scale = pow10(digits) as i128;
    for c in frac_part.chars() {
        let d = c.to_digit(10).ok_or(ParseAmountError::InvalidChar(c))?;
        scale /= 10;
        units += d as i128 * scale;
    }
    if units > i64::MAX as i128 {
        return Err(ParseAmountError::OutOfRange(orig.to_string()));
    }
    Ok(if neg { -(units as i64) } else { units as i64 })
}

/// Render units back to a canonical numeral with exactly `digits` fractional
/// digits (none when `digits == 0`).
pub fn format_amount(units: Amount, digits: u32) -> String {
    let p = pow10(digits);
    let sign = if units < 0 { "-" } else { "" };
    let abs = (units as i128).unsigned_abs();
    let whole = abs / p as u128;
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        let frac = abs % p as u128;
        format!("{sign}{whole}.{frac:0width$}", width = digits as usize)
    }
}

/// `round(num / den)` with ties away from zero; `den > 0`. Exact integer
/// arithmetic, used for discretization and split-cache keying.
pub fn div_round_half_away(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = (2 * num.unsigned_abs() + den.unsigned_abs()) / (2 * den.unsigned_abs());
    if num < 0 {
        -(q as i128)
    } else {
        q as i128
    }
}

/// `ceil(num / den)` for `num >= 0`, `den > 0`.
pub fn div_ceil(num: i128, den: i128) -> i128 {
    debug_assert!(num >= 0 && den > 0);
    (num + den - 1) / den
}

//! Exact rational scalars.
//!
//! Every quantity that participates in a verdict (weight, moment, covariance,
//! margin, tolerance) is a [`Rational`]: an arbitrary-precision fraction kept
//! in lowest terms with a positive denominator. No floating point enters any
//! decision path.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = BigRational;

/// Error produced when a rational string cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer part in rational literal `{0}`")]
    BadInteger(String),
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
    #[error("malformed rational literal `{0}` (expected `p` or `p/q`)")]
    Malformed(String),
}

/// Builds a rational from machine integers. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "rat() called with zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Builds an integer-valued rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `p` or `p/q` (optionally signed) into a rational in lowest terms.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let mut parts = trimmed.splitn(2, '/');
    let numer_text = parts.next().ok_or(ParseRationalError::Empty)?.trim();
    let numer: BigInt = numer_text
        .parse()
        .map_err(|_| ParseRationalError::BadInteger(trimmed.to_owned()))?;
    match parts.next() {
        None => Ok(Rational::from_integer(numer)),
        Some(denom_text) => {
            let denom: BigInt = denom_text
                .trim()
                .parse()
                .map_err(|_| ParseRationalError::Malformed(trimmed.to_owned()))?;
            if denom.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(trimmed.to_owned()));
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Formats a rational as `p` when integral, else `p/q` in lowest terms.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Exact absolute value.
pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

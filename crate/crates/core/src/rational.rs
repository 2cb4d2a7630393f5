//! Exact rational scalars and vectors.
//!
//! Every quantity in the segment semantics, the compiler and the analysis
//! passes is an arbitrary-precision rational kept in lowest terms, so
//! equality tests between the oracle, the executor and the LP bound are
//! structural.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Dense vector of rationals.
pub type RationalVector = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// Builds `num / den` from machine integers.
///
/// Panics if `den == 0`; use [`checked_div`] for data-dependent divisors.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational, RationalError> {
    if b.is_zero() {
        Err(RationalError::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

/// Parses `p`, `-p`, `p/q` or a finite decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let s = text.trim();
    let bad = || RationalError::Malformed(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let whole = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole_digits).map_err(|_| bad())?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let mut value = Rational::new(whole * &scale + frac, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 fails only on overflow of the numerator or denominator
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn is_nonnegative(q: &Rational) -> bool {
    !q.is_negative()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn zeros(n: usize) -> RationalVector {
    vec![Rational::zero(); n]
}

/// Largest dyadic `m / 2^k` in `[lo, hi]` with the smallest `k`, for
/// `0 < lo <= hi`. Keeps denominators small when a value only needs to be
/// chosen from an interval.
pub fn simple_dyadic_in(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo.is_positive() && lo <= hi);
    let mut scale = Rational::one();
    let two = int(2);
    loop {
        let m = (hi * &scale).floor();
        let candidate = m / &scale;
        if &candidate >= lo {
            return candidate;
        }
        scale = &scale * &two;
    }
}

/// Thin display wrapper for slices of rationals: `(1, 2/3, 0)`.
pub struct DisplayVector<'a>(pub &'a [Rational]);

impl fmt::Display for DisplayVector<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

//! Exact rational scalars.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Arbitrary-precision rational number used for every exact quantity.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse(format!("empty rational {s:?}")));
    }
    let r = Scalar::from_str(t).map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))?;
    Ok(r)
}

pub fn format_scalar(v: &Scalar) -> String {
    v.to_string()
}

pub fn to_f64(v: &Scalar) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Fall back through a scaled integer quotient for huge numerators/denominators.
        let shift = v.denom().bits().saturating_sub(900).max(v.numer().bits().saturating_sub(900));
        let n = (v.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (v.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn abs(v: &Scalar) -> Scalar {
    v.abs()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Scalar>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Exact square root of a nonnegative rational when it is a perfect square.
pub fn exact_sqrt(v: &Scalar) -> Option<Scalar> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().sqrt();
    let d = v.denom().sqrt();
    if &(&n * &n) == v.numer() && &(&d * &d) == v.denom() {
        Some(Scalar::new(n, d))
    } else {
        None
    }
}

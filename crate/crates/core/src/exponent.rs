//! Exponents in `[1, ∞]` stored as exact rationals, with `∞` as a first-class value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An ℓ_q exponent: a rational `q ≥ 1` or `∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedExponent {
    Finite(BigRational),
    Infinite,
}

impl ExtendedExponent {
    pub fn finite(q: BigRational) -> Result<Self> {
        if q < BigRational::one() {
            return Err(Error::domain(format!("exponent {q} is below 1")));
        }
        Ok(ExtendedExponent::Finite(q))
    }

    pub fn integer(q: i64) -> Result<Self> {
        Self::finite(BigRational::from_integer(q.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("zero denominator"));
        }
        Self::finite(BigRational::new(num.into(), den.into()))
    }

    pub fn infinity() -> Self {
        ExtendedExponent::Infinite
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedExponent::Infinite)
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> BigRational {
        match self {
            ExtendedExponent::Finite(q) => q.recip(),
            ExtendedExponent::Infinite => BigRational::zero(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExtendedExponent::Finite(q) => Some(q),
            ExtendedExponent::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedExponent::Finite(q) => rational_to_f64(q),
            ExtendedExponent::Infinite => f64::INFINITY,
        }
    }

    /// Strictly greater than the integer `m`.
    pub fn exceeds(&self, m: usize) -> bool {
        match self {
            ExtendedExponent::Finite(q) => *q > BigRational::from_integer(BigInt::from(m)),
            ExtendedExponent::Infinite => true,
        }
    }
}

/// Hölder conjugate `q* = q/(q−1)`; `∞ ↦ 1` and `1 ↦ ∞`.
pub fn holder_dual(q: &ExtendedExponent) -> ExtendedExponent {
    match q {
        ExtendedExponent::Infinite => ExtendedExponent::Finite(BigRational::one()),
        ExtendedExponent::Finite(v) if v.is_one() => ExtendedExponent::Infinite,
        ExtendedExponent::Finite(v) => ExtendedExponent::Finite(v / (v - BigRational::one())),
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // Scale down huge operands before dividing.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let a = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let b = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}

/// Parses `"3"`, `"7/2"`, `"2.5"` or `"-1.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || Error::domain(format!("cannot parse `{text}` as a rational"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| bad())?,
        };
        let den = num::pow(BigInt::from(10), frac.len());
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let magnitude = int_part.abs() * &den + frac_part;
        let num = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(num, den));
    }
    let num: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(num))
}

impl FromStr for ExtendedExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(ExtendedExponent::Infinite),
            other => ExtendedExponent::finite(parse_rational(other)?),
        }
    }
}

impl fmt::Display for ExtendedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedExponent::Finite(q) => write!(f, "{q}"),
            ExtendedExponent::Infinite => f.write_str("inf"),
        }
    }
}

impl PartialOrd for ExtendedExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedExponent::Infinite, ExtendedExponent::Infinite) => Ordering::Equal,
            (ExtendedExponent::Infinite, _) => Ordering::Greater,
            (_, ExtendedExponent::Infinite) => Ordering::Less,
            (ExtendedExponent::Finite(a), ExtendedExponent::Finite(b)) => a.cmp(b),
        }
    }
}

impl Serialize for ExtendedExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedExponent::Finite(q) => RationalJson(q).serialize(serializer),
            ExtendedExponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// JSON view of a rational: `{"num": .., "den": .., "decimal": ..}`.
pub struct RationalJson<'a>(pub &'a BigRational);

impl Serialize for RationalJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("Rational", 3)?;
        match (self.0.numer().to_i64(), self.0.denom().to_i64()) {
            (Some(n), Some(d)) => {
                st.serialize_field("num", &n)?;
                st.serialize_field("den", &d)?;
            }
            _ => {
                st.serialize_field("num", &self.0.numer().to_string())?;
                st.serialize_field("den", &self.0.denom().to_string())?;
            }
        }
        st.serialize_field("decimal", &rational_to_f64(self.0))?;
        st.end()
    }
}

pub(crate) fn serialize_rational<S: Serializer>(
    q: &BigRational,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    RationalJson(q).serialize(serializer)
}

pub(crate) fn serialize_opt_rational<S: Serializer>(
    q: &Option<BigRational>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => serializer.serialize_some(&RationalJson(q)),
        None => serializer.serialize_none(),
    }
}

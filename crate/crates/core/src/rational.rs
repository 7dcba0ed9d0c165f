//! Exact rational arithmetic helpers.
//!
//! Every quantity that participates in an exact check is a [`Rational`]
//! (an arbitrary-precision `num` rational). Text forms are `"p/q"`, bare
//! integers, or finite decimals such as `"0.125"`; all of them are parsed
//! exactly.

use std::fmt;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational `{text}`: {reason}")]
pub struct ParseRationalError {
    pub text: String,
    pub reason: &'static str,
}

fn parse_err(text: &str, reason: &'static str) -> ParseRationalError {
    ParseRationalError {
        text: text.to_owned(),
        reason,
    }
}

/// Parses `p/q`, an integer, or a finite decimal.
pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(parse_err(text, "empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| parse_err(text, "bad numerator"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| parse_err(text, "bad denominator"))?;
        if !d.is_positive() {
            return Err(parse_err(text, "denominator must be positive"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(parse_err(text, "bad decimal"));
        }
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| parse_err(text, "bad decimal"))?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| parse_err(text, "bad decimal"))?;
        let scale = num::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::from_integer(int_part.abs()) + Rational::new(frac_part, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s.parse().map_err(|_| parse_err(text, "not a number"))?;
    Ok(Rational::from_integer(n))
}

/// `p/q` form, or a bare integer when `q == 1`.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= q`, as `u64`. `None` for negative or huge values.
pub fn ceil_u64(q: &Rational) -> Option<u64> {
    q.ceil().to_integer().to_u64()
}

pub fn max<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn half(q: &Rational) -> Rational {
    q / int(2)
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}

/// Serde adapter: serialize as a `"p/q"` string, accept strings or JSON numbers.
pub mod serde_text {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a rational as \"p/q\", an integer, or a finite number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        /// JSON `0.1` means `1/10`: the shortest decimal that round-trips is parsed exactly.
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            parse(&v.to_string()).map_err(E::custom)
        }
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_text_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&format(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw: Vec<Text> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|t| t.0).collect())
    }
}

/// A deserializable wrapper, handy inside maps and nested arrays.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Text(pub Rational);

impl<'de> serde::Deserialize<'de> for Text {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(serde_text::RationalVisitor).map(Text)
    }
}

impl serde::Serialize for Text {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

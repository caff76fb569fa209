//! Exact rational numbers and their textual forms.
//!
//! Everything in the core works on [`Rational`] so that equality cases in
//! ratio comparisons stay exact. Values are written as `"p/q"` (or `"p"`
//! when the denominator is one) and read from either that form or a plain
//! decimal such as `"0.015"`, which is converted exactly.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational")]
pub struct ParseRationalError {
    pub input: String,
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"`, `"p"`, or a dot-separated decimal (with optional
/// exponent, e.g. `"1e-2"`). Locale independent.
pub fn parse(input: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if (whole.is_empty() && frac.is_empty())
        || !whole.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let mut numer: BigInt = format!("{whole}{frac}").parse().map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * ten.pow(scale as u32))
    } else {
        Rational::new(numer, ten.pow((-scale) as u32))
    };
    Ok(value)
}

pub fn format(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Approximate value for rendering only.
pub fn to_f64(value: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact `base^exponent` for a non-negative base and positive rational
/// exponent. Returns `None` when the result is irrational.
pub fn exact_pow(base: &Rational, exponent: &Rational) -> Option<Rational> {
    if base.is_negative() || !exponent.is_positive() {
        return None;
    }
    if base.is_zero() {
        return Some(Rational::zero());
    }
    let p: u32 = exponent.numer().try_into().ok()?;
    let q: u32 = exponent.denom().try_into().ok()?;
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(q);
        (Pow::pow(&r, q) == *n).then_some(r)
    };
    let numer = root(base.numer())?;
    let denom = root(base.denom())?;
    Some(Pow::pow(Rational::new(numer, denom), p))
}

/// Serde adapter writing `"p/q"` strings and reading strings or JSON numbers.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an exact rational as \"p/q\", a decimal string, or a number")
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

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            // Shortest round-trip decimal of the float, read exactly.
            parse(&v.to_string()).map_err(E::custom)
        }
    }
}

pub mod serde_rational_vec {
    use super::*;
    use serde::de::SeqAccess;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Vec<Rational>, D::Error> {
        struct SeqVisitor;
        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = Vec<Rational>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of exact rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(v) = seq.next_element::<Wrapped>()? {
                    out.push(v.0);
                }
                Ok(out)
            }
        }
        deserializer.deserialize_seq(SeqVisitor)
    }

    struct Wrapped(Rational);

    impl<'de> serde::Deserialize<'de> for Wrapped {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            d.deserialize_any(serde_rational::RationalVisitor).map(Wrapped)
        }
    }
}

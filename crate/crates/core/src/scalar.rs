//! Scalar abstraction shared by the analyzers, plus exact-rational helpers.
//!
//! Knowledge-base data and world counts are always exact. The scenario
//! analyzers are generic over [`Scalar`] so the same code runs over
//! [`Rational`] for exact verdicts and over `f64` for quick sweeps.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Numeric type the analyzers are generic over.
pub trait Scalar:
    Clone + PartialOrd + Debug + Display + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Exact rational value; `None` for non-finite floats.
    fn to_rational(&self) -> Option<Rational>;

    fn from_rational(r: &Rational) -> Self;

    /// Whether arithmetic on this type is exact.
    fn is_exact() -> bool;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }
}

impl Scalar for Rational {
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn is_exact() -> bool {
        true
    }
}

impl Scalar for f64 {
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn to_rational(&self) -> Option<Rational> {
        Rational::from_float(*self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn is_exact() -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Parses `3/5`, `0.6`, `1`, `-2.5e-1` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    parse_decimal(s).ok_or_else(err)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
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
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() {
        "0"
    } else {
        &all_digits
    })
    .ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

/// Canonical text form: `p/q` in lowest terms, or a bare integer.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational from a float, panicking on non-finite input.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// `serde` adapters storing rationals as canonical strings.
///
/// Deserialization also accepts JSON numbers; floats go through their
/// shortest round-trip decimal form so `0.6` reads as exactly `3/5`.
pub mod serde_rational {
    use super::*;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as a number or a string like \"3/5\"")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            parse_rational(&format!("{v}")).map_err(E::custom)
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw: Vec<Wrapped> = serde::Deserialize::deserialize(d)?;
            Ok(raw.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<String>> = m
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect();
            serde::Serialize::serialize(&rows, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let raw: Vec<Vec<Wrapped>> = serde::Deserialize::deserialize(d)?;
            Ok(raw
                .into_iter()
                .map(|row| row.into_iter().map(|w| w.0).collect())
                .collect())
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_rational(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            let raw: Option<Wrapped> = serde::Deserialize::deserialize(d)?;
            Ok(raw.map(|w| w.0))
        }
    }

    /// Newtype usable anywhere a `Deserialize` rational is needed.
    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
    pub struct Wrapped(pub Rational);

    impl<'de> serde::Deserialize<'de> for Wrapped {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            d.deserialize_any(RationalVisitor).map(Wrapped)
        }
    }

    impl serde::Serialize for Wrapped {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::serde_rational::serialize(&self.0, s)
        }
    }
}

/// `serde` adapters for any [`Scalar`]: exact types are written as
/// canonical rational strings, floats as JSON numbers. Both read either form.
pub mod serde_scalar {
    use super::serde_rational::Wrapped;
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    struct Out<'a, T>(&'a T);

    impl<T: Scalar> Serialize for Out<'_, T> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            if T::is_exact() {
                let r = self
                    .0
                    .to_rational()
                    .ok_or_else(|| serde::ser::Error::custom("non-finite value"))?;
                s.serialize_str(&format_rational(&r))
            } else {
                s.serialize_f64(self.0.to_f64().unwrap_or(f64::NAN))
            }
        }
    }

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        Out(v).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        Wrapped::deserialize(d).map(|w| T::from_rational(&w.0))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<T: Scalar, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(Out))
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
            let raw: Vec<Wrapped> = Deserialize::deserialize(d)?;
            Ok(raw.iter().map(|w| T::from_rational(&w.0)).collect())
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<T: Scalar, S: Serializer>(m: &[Vec<T>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<Out<T>>> =
                m.iter().map(|row| row.iter().map(Out).collect()).collect();
            rows.serialize(s)
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<T>>, D::Error> {
            let raw: Vec<Vec<Wrapped>> = Deserialize::deserialize(d)?;
            Ok(raw
                .iter()
                .map(|row| row.iter().map(|w| T::from_rational(&w.0)).collect())
                .collect())
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<T: Scalar, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref().map(Out).serialize(s)
        }

        pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<T>, D::Error> {
            let raw: Option<Wrapped> = Deserialize::deserialize(d)?;
            Ok(raw.map(|w| T::from_rational(&w.0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        assert_eq!(parse_rational("0.6").unwrap(), r(3, 5));
        assert_eq!(parse_rational("3/5").unwrap(), r(3, 5));
        assert_eq!(parse_rational("6/10").unwrap(), r(3, 5));
        assert_eq!(parse_rational("1").unwrap(), r(1, 1));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), r(-1, 4));
        assert_eq!(parse_rational("1.7").unwrap(), r(17, 10));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1..2", "/", "0.5.5", "e3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&r(6, 10)), "3/5");
        assert_eq!(format_rational(&r(4, 2)), "2");
        assert_eq!(format_rational(&r(0, 7)), "0");
    }

    #[test]
    fn float_numbers_deserialize_through_shortest_decimal() {
        let w: serde_rational::Wrapped = serde_json::from_str("0.2").unwrap();
        assert_eq!(w.0, r(1, 5));
        let w: serde_rational::Wrapped = serde_json::from_str("\"1/2\"").unwrap();
        assert_eq!(w.0, r(1, 2));
    }
}

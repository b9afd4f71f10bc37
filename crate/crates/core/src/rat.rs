//! Exact rational helpers and their string encoding (`"p/q"`, or `"p"` when integral).

use rug::{Integer, Rational};
use serde::{de, Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = Integer::from_str_radix(num, 10).map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}")))?;
    let den = Integer::from_str_radix(den, 10).map_err(|_| Error::InvalidArgument(format!("bad rational {s:?}")))?;
    if den == 0 {
        return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::from((num, den)))
}

pub fn format(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(r))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let raw = RawRational::deserialize(d)?;
    raw.into_rational().map_err(de::Error::custom)
}

/// Accepts either a JSON string or a JSON integer.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawRational {
    Str(String),
    Int(i64),
}

impl RawRational {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RawRational::Str(s) => parse(&s),
            RawRational::Int(i) => Ok(Rational::from(i)),
        }
    }
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&super::format(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw = Vec::<RawRational>::deserialize(d)?;
        raw.into_iter().map(|r| r.into_rational().map_err(de::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("45/4").unwrap(), Rational::from((45, 4)));
        assert_eq!(parse("-7").unwrap(), Rational::from(-7));
        assert_eq!(parse(" 6 / 8 ").unwrap(), Rational::from((3, 4)));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert_eq!(format(&Rational::from((-117, 8))), "-117/8");
        assert_eq!(format(&Rational::from(12)), "12");
    }
}

//! Serde adapters writing arbitrary-precision integers as decimal strings.

use num_bigint::BigInt;
use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

pub fn parse_int(s: &str) -> Result<BigInt, String> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| format!("not a decimal integer: {s:?}"))
}

pub mod big {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = IntLike::deserialize(d)?;
        raw.into_big().map_err(D::Error::custom)
    }
}

pub mod big_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<IntLike>::deserialize(d)?;
        raw.into_iter()
            .map(|x| x.into_big().map_err(D::Error::custom))
            .collect()
    }
}

pub mod big_vecs {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            let row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Accepts either a decimal string or a JSON integer on input.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntLike {
    Str(String),
    Int(i64),
}

impl IntLike {
    fn into_big(self) -> Result<BigInt, String> {
        match self {
            IntLike::Str(s) => parse_int(&s),
            IntLike::Int(i) => Ok(BigInt::from(i)),
        }
    }
}

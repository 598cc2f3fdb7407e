//! Serde helpers for values JSON cannot carry natively.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExtRepr {
    Num(f64),
    Text(String),
}

fn to_repr(v: f64) -> ExtRepr {
    if v == f64::INFINITY {
        ExtRepr::Text("inf".into())
    } else if v == f64::NEG_INFINITY {
        ExtRepr::Text("-inf".into())
    } else {
        ExtRepr::Num(v)
    }
}

fn from_repr<E: de::Error>(r: ExtRepr) -> Result<f64, E> {
    match r {
        ExtRepr::Num(v) => Ok(v),
        ExtRepr::Text(s) => match s.as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => Err(E::custom(format!("expected a number or \"inf\"/\"-inf\", found {other:?}"))),
        },
    }
}

/// Extended reals: `±inf` travel as the strings `"inf"` / `"-inf"`.
pub mod ext_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(ExtRepr::deserialize(d)?)
    }
}

/// A list of extended-real pairs, e.g. interval endpoints.
pub mod ext_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<(ExtRepr, ExtRepr)> = v.iter().map(|&(a, b)| (to_repr(a), to_repr(b))).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        let reprs: Vec<(ExtRepr, ExtRepr)> = Vec::deserialize(d)?;
        reprs.into_iter().map(|(a, b)| Ok((from_repr(a)?, from_repr(b)?))).collect()
    }
}

/// A natural logarithm carried in a report; serializes as `{"log": true, "value": ln}`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogScalar(pub f64);

#[derive(Serialize, Deserialize)]
struct LogRepr {
    log: bool,
    #[serde(with = "ext_f64")]
    value: f64,
}

impl Serialize for LogScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LogRepr { log: true, value: self.0 }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = LogRepr::deserialize(d)?;
        if !r.log {
            return Err(de::Error::custom("log-scale field must carry \"log\": true"));
        }
        Ok(LogScalar(r.value))
    }
}

impl LogScalar {
    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

/// `SignedLog` as `{"log": true, "sign": s, "value": ln|x|}`.
pub mod signed_log {
    use super::*;
    use crate::numeric::SignedLog;

    #[derive(Serialize, Deserialize)]
    struct Repr {
        log: bool,
        sign: i8,
        #[serde(with = "ext_f64")]
        value: f64,
    }

    pub fn serialize<S: Serializer>(v: &SignedLog, s: S) -> Result<S::Ok, S::Error> {
        Repr { log: true, sign: v.sign, value: v.ln_abs }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SignedLog, D::Error> {
        let r = Repr::deserialize(d)?;
        if !r.log || !(-1..=1).contains(&r.sign) {
            return Err(de::Error::custom("signed log field needs \"log\": true and sign in {-1, 0, 1}"));
        }
        Ok(SignedLog { sign: r.sign, ln_abs: r.value })
    }
}

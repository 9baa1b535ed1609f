use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

/// An extended-real value: `-inf < finite < +inf`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Extended<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::NegInf => Extended::NegInf,
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::PosInf => Extended::PosInf,
        }
    }
}

impl<T: Scalar> Extended<T> {
    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Finite(v) => v.to_f64(),
            Extended::PosInf => f64::INFINITY,
        }
    }
}

impl Extended<f64> {
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Extended::PosInf
        } else if v == f64::NEG_INFINITY {
            Extended::NegInf
        } else {
            Extended::Finite(v)
        }
    }
}

impl<T: Neg<Output = T>> Neg for Extended<T> {
    type Output = Extended<T>;

    fn neg(self) -> Self::Output {
        match self {
            Extended::NegInf => Extended::PosInf,
            Extended::Finite(v) => Extended::Finite(-v),
            Extended::PosInf => Extended::NegInf,
        }
    }
}

impl fmt::Display for Extended<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => f.write_str("-inf"),
            Extended::Finite(v) => f.write_str(&format_rational(v)),
            Extended::PosInf => f.write_str("+inf"),
        }
    }
}

impl Serialize for Extended<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Extended<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_extended(&s).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Extended<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::NegInf => s.serialize_str("-inf"),
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::PosInf => s.serialize_str("+inf"),
        }
    }
}

pub fn parse_extended(s: &str) -> crate::Result<Extended<Rational>> {
    match s.trim() {
        "+inf" | "inf" => Ok(Extended::PosInf),
        "-inf" => Ok(Extended::NegInf),
        other => parse_rational(other).map(Extended::Finite),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn ordering_and_negation() {
        let a: Extended<Rational> = Extended::NegInf;
        let b = Extended::Finite(int(3));
        let c: Extended<Rational> = Extended::PosInf;
        assert!(a < b && b < c);
        assert_eq!(-c.clone(), a);
        assert_eq!(-b.clone(), Extended::Finite(int(-3)));
    }

    #[test]
    fn text_round_trip() {
        for s in ["-inf", "+inf", "7/3", "-1/2"] {
            assert_eq!(parse_extended(s).unwrap().to_string(), s);
        }
    }
}

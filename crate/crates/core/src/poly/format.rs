//! JSON interchange: `{"num_vars": n, "terms": [{"exponents": [..], "coeff": "p/q"}]}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub num_vars: usize,
    pub terms: Vec<TermRecord>,
}

impl From<&Polynomial<Rational>> for PolyRecord {
    fn from(p: &Polynomial<Rational>) -> Self {
        PolyRecord {
            num_vars: p.num_vars(),
            terms: p
                .terms()
                .map(|(m, c)| TermRecord { exponents: m.0.clone(), coeff: format_rational(c) })
                .collect(),
        }
    }
}

impl TryFrom<PolyRecord> for Polynomial<Rational> {
    type Error = Error;

    fn try_from(rec: PolyRecord) -> Result<Self> {
        let mut terms = Vec::with_capacity(rec.terms.len());
        for t in rec.terms {
            terms.push((t.exponents, parse_rational(&t.coeff)?));
        }
        Polynomial::from_terms(rec.num_vars, terms)
    }
}

impl Serialize for Polynomial<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = PolyRecord::deserialize(d)?;
        Polynomial::try_from(rec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = Polynomial::from_terms(2, [(vec![2, 0], ratio(-3, 7)), (vec![0, 1], ratio(5, 1))]).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: Polynomial<Rational> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.contains("\"-3/7\""));
    }

    #[test]
    fn rejects_bad_records() {
        let bad = r#"{"num_vars": 2, "terms": [{"exponents": [1], "coeff": "1"}]}"#;
        assert!(serde_json::from_str::<Polynomial<Rational>>(bad).is_err());
        let bad = r#"{"num_vars": 1, "terms": [{"exponents": [1], "coeff": "1/0"}]}"#;
        assert!(serde_json::from_str::<Polynomial<Rational>>(bad).is_err());
    }
}

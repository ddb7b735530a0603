//! Real scalars as they appear in spec documents: a JSON number, a decimal
//! string, or a fraction string `"p/q"`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    /// Decimal strings go through the correctly rounded std parser. A fraction
    /// of two integers below 2^53 is a single correctly rounded division.
    pub fn to_f64(&self) -> Result<f64, String> {
        let v = match self {
            Scalar::Number(v) => *v,
            Scalar::Text(s) => parse_text(s)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite scalar {self:?}"))
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Number(v)
    }
}

fn parse_text(s: &str) -> Result<f64, String> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = parse_decimal(p)?;
            let q = parse_decimal(q)?;
            if q == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(p / q)
        }
        None => parse_decimal(s),
    }
}

fn parse_decimal(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("nan") || s.to_ascii_lowercase().contains("inf") {
        return Err(format!("not a finite decimal: {s:?}"));
    }
    s.parse::<f64>().map_err(|e| format!("bad decimal {s:?}: {e}"))
}

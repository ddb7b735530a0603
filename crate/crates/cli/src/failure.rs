//! Failure certificates and exit codes.

use flowmetric_core::Error;
use flowmetric_qms::QmsError;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;
pub const EXIT_NOT_ERGODIC: i32 = 5;
pub const EXIT_SINGULAR: i32 = 6;

/// Machine-readable record of a failed run.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub exit_code: i32,
    pub kind: String,
    /// `(i)`, `(ii)` or `(iii)` when a construction condition fails.
    pub condition: Option<String>,
    pub message: String,
    pub details: Value,
}

impl Failure {
    fn new(exit_code: i32, kind: impl Into<String>, message: String) -> Self {
        Failure { exit_code, kind: kind.into(), condition: None, message, details: Value::Null }
    }

    pub fn io(message: String) -> Self {
        Failure::new(EXIT_FAILED, "Io", message)
    }

    pub fn parse(message: String) -> Self {
        Failure::new(EXIT_PARSE, "ParseError", message)
    }

    fn condition(mut self, c: &str) -> Self {
        self.condition = Some(c.into());
        self
    }

    fn details(mut self, d: Value) -> Self {
        self.details = d;
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::NonPositivePairing { pairing, point } => Failure::new(EXIT_CONDITION, "NonPositivePairing", message)
                .condition("(i)")
                .details(json!({ "pairing": pairing, "point": point })),
            Error::ConditionTwoViolated { point, x_norm } => Failure::new(EXIT_CONDITION, "ConditionTwoViolated", message)
                .condition("(ii)")
                .details(json!({ "point": point, "x_norm": x_norm })),
            Error::ConditionThreeViolated(base) => Failure::new(EXIT_CONDITION, "ConditionThreeViolated", message)
                .condition("(iii)")
                .details(serde_json::to_value(&*base).unwrap_or(Value::Null)),
            Error::NotPositiveDefinite(min) => Failure::new(EXIT_CONDITION, "NotPositiveDefinite", message)
                .condition("(iii)")
                .details(json!({ "min_eigenvalue": min })),
            Error::SpecParse(_) => Failure::new(EXIT_PARSE, "SpecParse", message),
            Error::SpecDimension(_) => Failure::new(EXIT_PARSE, "SpecDimension", message),
            Error::DegenerateCritical { point, condition } => Failure::new(EXIT_DEGENERATE, "DegenerateCritical", message)
                .details(json!({ "point": point, "jacobian_condition": condition })),
            Error::CoverageGap(points) => {
                let shown: Vec<_> = points.iter().take(20).collect();
                Failure::new(EXIT_FAILED, "CoverageGap", message).details(json!({ "count": points.len(), "points": shown }))
            }
            Error::Atlas(_) => Failure::new(EXIT_FAILED, "Atlas", message),
            other => Failure::new(EXIT_FAILED, variant_name(&other), message),
        }
    }
}

impl From<QmsError> for Failure {
    fn from(e: QmsError) -> Self {
        let message = e.to_string();
        match e {
            QmsError::InvalidHamiltonian(defect) => {
                Failure::new(EXIT_PARSE, "InvalidHamiltonian", message).details(json!({ "hermiticity_defect": defect }))
            }
            QmsError::SpecParse(_) => Failure::new(EXIT_PARSE, "SpecParse", message),
            QmsError::SpecDimension(_) => Failure::new(EXIT_PARSE, "SpecDimension", message),
            QmsError::NotErgodic { ratio } => {
                Failure::new(EXIT_NOT_ERGODIC, "NotErgodic", message).details(json!({ "singular_value_ratio": ratio }))
            }
            QmsError::SingularState(min) => {
                Failure::new(EXIT_SINGULAR, "SingularState", message).details(json!({ "min_eigenvalue": min }))
            }
            QmsError::Core(inner) => inner.into(),
            other => Failure::new(EXIT_FAILED, variant_name(&other), message),
        }
    }
}

/// Variant name from the `Debug` output.
fn variant_name<T: std::fmt::Debug>(v: &T) -> String {
    let s = format!("{v:?}");
    let end = s.find(|c: char| !c.is_alphanumeric()).unwrap_or(s.len());
    s[..end].to_string()
}

/// The JSON written in place of a report when a command fails.
pub fn certificate(command: &str, f: &Failure) -> Value {
    json!({
        "command": command,
        "status": "failed",
        "exit_code": f.exit_code,
        "error": f,
    })
}

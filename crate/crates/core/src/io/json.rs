//! JSON result documents.
//!
//! Rationals are always written as `num/den` strings so that consumers
//! never coerce them through floating point.

use serde::{Deserialize, Serialize};

use crate::boost::{ExactResult, Outcome, SolveStats};
use crate::general::VariableMap;
use crate::rational::{format_rational, Rational};
use crate::verify::Certificate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<String>>,
    /// Certificate for the standard-form LP that was actually solved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub stats: SolveStats,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

impl ResultDocument {
    /// Builds the document, mapping values back through `map` when the
    /// solved LP came from a general-form model.
    pub fn new(result: &ExactResult, map: Option<&VariableMap>) -> Self {
        let mut doc = ResultDocument {
            status: result.status().to_string(),
            objective: None,
            x: None,
            y: None,
            certificate: result.certificate().cloned(),
            failure: None,
            stats: result.stats.clone(),
        };
        match &result.outcome {
            Outcome::Certified(Certificate::Optimal { x, y, objective, .. }) => {
                let (obj, x, y) = match map {
                    Some(map) => (map.objective(objective), map.recover(x), map.recover_duals(y)),
                    None => (objective.clone(), x.clone(), y.clone()),
                };
                doc.objective = Some(format_rational(&obj));
                doc.x = Some(strings(&x));
                doc.y = Some(strings(&y));
            }
            Outcome::Certified(_) => {}
            Outcome::Failure(reason) => doc.failure = Some(reason.name().to_string()),
        }
        doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize")
    }
}

/// The JSON schema shipped for result documents.
pub const RESULT_SCHEMA: &str = include_str!("../../schema/result.schema.json");

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;
    use crate::{solve_exact, RationalLp, SolveConfig, SparseRationalMatrix};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn optimal_document_round_trips() {
        let a = SparseRationalMatrix::from_dense(&[vec![q("3")]]);
        let lp = RationalLp::new(a, vec![q("1")], vec![q("1")], vec![q("0")]).unwrap();
        let result = solve_exact(&lp, &SolveConfig::default());
        let doc = ResultDocument::new(&result, None);
        assert_eq!(doc.status, "optimal");
        assert_eq!(doc.objective.as_deref(), Some("1/3"));
        assert_eq!(doc.x, Some(vec!["1/3".to_string()]));
        let back: ResultDocument = serde_json::from_str(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(parse_rational(back.objective.as_deref().unwrap()).unwrap(), q("1/3"));
    }

    #[test]
    fn schema_is_valid_json() {
        let schema: serde_json::Value = serde_json::from_str(RESULT_SCHEMA).unwrap();
        assert_eq!(schema["type"], "object");
    }
}

//! Checks and the run summary serialised to `summary.json`.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// One pass/fail verdict with the measurements behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(serialize_with = "finite_map")]
    pub metrics: BTreeMap<String, f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            pass,
            metrics: BTreeMap::new(),
        }
    }

    pub fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    CheckFailure,
    SolverFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::CheckFailure => 1,
            Status::SolverFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub preset: String,
    pub criterion: String,
    pub seed: u64,
    pub status: Status,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<String>,
}

impl Summary {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Metric of a named check; `NaN` when either is absent.
    pub fn metric(&self, check: &str, key: &str) -> f64 {
        self.check(check).and_then(|c| c.get(key)).unwrap_or(f64::NAN)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serialises");
        s.push('\n');
        s
    }
}

fn finite_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        if v.is_finite() {
            map.serialize_entry(k, v)?;
        } else {
            map.serialize_entry(k, &crate::artifacts::format_number(*v))?;
        }
    }
    map.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_metrics_become_strings() {
        let c = Check::new("x", true).metric("b", f64::INFINITY).metric("a", 1.5);
        let s = Summary {
            preset: "p".into(),
            criterion: "c".into(),
            seed: 1,
            status: Status::Pass,
            pass: true,
            checks: vec![c],
            error: None,
            artifacts: vec![],
        };
        let json = s.to_json();
        assert!(json.contains("\"a\": 1.5"));
        assert!(json.contains("\"b\": \"inf\""));
        assert!(json.find("\"a\"").unwrap() < json.find("\"b\"").unwrap());
        assert!(!json.contains("error"));
        assert_eq!(s.metric("x", "a"), 1.5);
        assert!(s.metric("y", "a").is_nan());
    }
}

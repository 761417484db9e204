//! Machine-readable command reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::matcore::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// A command's inputs, computed values and checks. `pass` holds exactly when
/// every check passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            pass: true,
        }
    }

    pub fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.to_string(), to_value(value));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), to_value(value));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    /// `|actual - expected| <= tolerance`.
    pub fn check_scalar(&mut self, name: &str, expected: f64, actual: f64, tolerance: f64) {
        self.push(Check {
            name: name.to_string(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: Some(tolerance),
            pass: (actual - expected).abs() <= tolerance,
            provenance: None,
        });
    }

    /// `actual <= bound`.
    pub fn check_at_most(&mut self, name: &str, actual: f64, bound: f64) {
        self.push(Check {
            name: name.to_string(),
            expected: json!(format!("<= {bound:e}")),
            actual: json!(actual),
            tolerance: Some(bound),
            pass: actual <= bound,
            provenance: None,
        });
    }

    pub fn check_bool(&mut self, name: &str, expected: bool, actual: bool) {
        self.push(Check {
            name: name.to_string(),
            expected: json!(expected),
            actual: json!(actual),
            tolerance: None,
            pass: expected == actual,
            provenance: None,
        });
    }

    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut check in other.checks {
            check.name = format!("{prefix}/{}", check.name);
            self.push(check);
        }
        for w in other.warnings {
            self.warn(format!("{prefix}: {w}"));
        }
        self.result(prefix, other.results);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for c in &self.checks {
            let verdict = if c.pass { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "{verdict} {}: actual {} expected {}", c.name, c.actual, c.expected);
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(
            out,
            "{}: {passed}/{} checks passed",
            self.command,
            self.checks.len()
        );
        out
    }
}

pub fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("report values serialize")
}

pub fn matrix_value(m: &Matrix) -> Value {
    to_value(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_checks() {
        let mut r = Report::new("t");
        r.check_scalar("a", 1.0, 1.0 + 1e-12, 1e-9);
        assert!(r.pass);
        r.check_bool("b", true, false);
        assert!(!r.pass);
        assert_eq!(r.checks.len(), 2);
        assert!(r.summary().contains("1/2 checks passed"));
    }

    #[test]
    fn json_is_deterministic() {
        let build = || {
            let mut r = Report::new("t");
            r.result("z", 1.0);
            r.result("a", vec![1, 2]);
            r.input("file", "x.mtx");
            r.to_json()
        };
        assert_eq!(build(), build());
        assert!(build().find("\"a\"").unwrap() < build().find("\"z\"").unwrap());
    }
}

//! Pinned cases described by a JSON manifest.
//!
//! ```json
//! {"cases": [{"name": "...", "A": "a.mtx", "M": "m.mtx", "U": "u.mtx", "b": "b.mtx",
//!             "expected": {"rho_h": {"value": "7/40", "tol": 1e-9, "provenance": "..."}}}]}
//! ```
//!
//! File paths are relative to the manifest. Scalars may be given as numbers
//! or as `"p/q"` strings; matrices as lists of rows of either.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use super::mtx::{read_matrix, ReadError};
use super::report::{matrix_value, Check, Report};
use super::CliError;
use crate::alternate::{alternating_solve, build_alternating, convergence_check, induced_splitting, AlternatingScheme};
use crate::matcore::{is_nonneg, pinv, Matrix, Tolerances};
use crate::solver::{stationary_solve, StopRule};
use crate::spectral::spectral_radius;
use crate::splitting::{build_splitting, is_semimonotone, weak_regular_chain, SplitClass, Splitting};

pub const DEFAULT_SCALAR_TOL: f64 = 1e-9;
pub const DEFAULT_MATRIX_TOL: f64 = 1e-10;

#[derive(Debug, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub cases: Vec<CaseFile>,
}

#[derive(Debug, Deserialize)]
pub struct CaseFile {
    pub name: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "M", default)]
    pub m: Option<String>,
    #[serde(rename = "U", default)]
    pub u: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub expected: BTreeMap<String, Expected>,
}

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub value: Value,
    #[serde(default)]
    pub tol: Option<f64>,
    pub provenance: String,
}

struct LoadedCase {
    a: Matrix,
    m: Option<Matrix>,
    u: Option<Matrix>,
    b: Option<Matrix>,
}

fn load(dir: &Path, case: &CaseFile) -> Result<LoadedCase, ReadError> {
    let read = |p: &Option<String>| -> Result<Option<Matrix>, ReadError> {
        p.as_ref().map(|p| read_matrix(&dir.join(p))).transpose()
    };
    Ok(LoadedCase {
        a: read_matrix(&dir.join(&case.a))?,
        m: read(&case.m)?,
        u: read(&case.u)?,
        b: read(&case.b)?,
    })
}

/// Parses `"p/q"`, a plain decimal string, or a JSON number.
pub fn parse_scalar(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.split_once('/') {
            Some((p, q)) => Some(p.trim().parse::<f64>().ok()? / q.trim().parse::<f64>().ok()?),
            None => s.trim().parse().ok(),
        },
        _ => None,
    }
}

fn parse_matrix_value(v: &Value) -> Option<Matrix> {
    let rows: Vec<Vec<f64>> = v
        .as_array()?
        .iter()
        .map(|row| row.as_array()?.iter().map(parse_scalar).collect::<Option<Vec<f64>>>())
        .collect::<Option<_>>()?;
    Matrix::from_rows(&rows).ok()
}

struct Evaluator<'a> {
    case: &'a LoadedCase,
    tol: &'a Tolerances,
    stop: &'a StopRule,
}

impl Evaluator<'_> {
    fn u(&self) -> Result<&Matrix, String> {
        self.case.u.as_ref().ok_or_else(|| "case has no U".to_string())
    }

    fn single(&self) -> Result<Splitting, String> {
        build_splitting(&self.case.a, self.u()?, self.tol).map_err(|e| e.to_string())
    }

    fn scheme(&self) -> Result<AlternatingScheme, String> {
        let m = self.case.m.as_ref().ok_or("case has no M")?;
        build_alternating(&self.case.a, m, self.u()?, self.tol).map_err(|e| e.to_string())
    }

    fn rho(&self, h: &Matrix) -> Result<Value, String> {
        spectral_radius(h, self.tol).map(|r| json!(r)).map_err(|e| e.to_string())
    }

    fn evaluate(&self, key: &str) -> Result<Value, String> {
        let tol = self.tol;
        let s = |e: crate::Error| e.to_string();
        match key {
            "class" => Ok(json!(self.single()?.class().name())),
            "proper" => Ok(json!(self.single()?.is_proper())),
            "semimonotone" => Ok(json!(is_semimonotone(&self.case.a, tol).map_err(s)?)),
            "nonneg_a" => Ok(json!(is_nonneg(&self.case.a, tol))),
            "pinv_a" => Ok(matrix_value(&pinv(&self.case.a, tol).map_err(s)?)),
            "pinv_u" => Ok(matrix_value(&pinv(self.u()?, tol).map_err(s)?)),
            "rho_uv" => self.rho(self.single()?.iteration_matrix()),
            "rho_adagu" => Ok(json!(weak_regular_chain(&self.single()?, tol).map_err(s)?.rho_adagu)),
            "chain_consistent" => Ok(json!(weak_regular_chain(&self.single()?, tol).map_err(s)?.chain_consistent())),
            "rho_mn" => self.rho(self.scheme()?.first().iteration_matrix()),
            "rho_h" => self.rho(self.scheme()?.iteration_matrix()),
            "h" => Ok(matrix_value(self.scheme()?.iteration_matrix())),
            "theorem_applies" => Ok(json!(convergence_check(&self.scheme()?, tol).map_err(s)?.theorem_applies)),
            "induced_b" => Ok(matrix_value(&induced_splitting(&self.scheme()?, tol).map_err(s)?.b)),
            "induced_class" => Ok(json!(induced_splitting(&self.scheme()?, tol).map_err(s)?.class.name())),
            "solution" | "converged" => {
                let b = self.case.b.as_ref().ok_or("case has no b")?;
                let report = if self.case.m.is_some() {
                    alternating_solve(&self.scheme()?, b, None, self.stop)
                } else {
                    stationary_solve(&self.single()?, b, None, self.stop)
                }
                .map_err(s)?;
                Ok(if key == "solution" {
                    matrix_value(&report.final_iterate)
                } else {
                    json!(report.converged)
                })
            }
            other => Err(format!("unknown expected key {other:?}")),
        }
    }
}

fn compare(expected: &Value, actual: &Value, tol: Option<f64>) -> (bool, Option<f64>) {
    match (expected, actual) {
        (Value::Bool(e), Value::Bool(a)) => (e == a, None),
        (Value::String(e), Value::String(a)) => (e == a, None),
        (Value::Array(_), Value::Array(_)) => {
            let tol = tol.unwrap_or(DEFAULT_MATRIX_TOL);
            let pass = match (parse_matrix_value(expected), parse_matrix_value(actual)) {
                (Some(e), Some(a)) => e.shape() == a.shape() && e.max_abs_diff(&a) <= tol,
                _ => false,
            };
            (pass, Some(tol))
        }
        (_, Value::Number(_)) => {
            let tol = tol.unwrap_or(DEFAULT_SCALAR_TOL);
            let pass = match (parse_scalar(expected), parse_scalar(actual)) {
                (Some(e), Some(a)) => (e - a).abs() <= tol,
                _ => false,
            };
            (pass, Some(tol))
        }
        _ => (false, tol),
    }
}

/// Runs every case of the manifest at `path`, in manifest order.
pub fn run_suite(path: &Path, tol: &Tolerances, stop: &StopRule) -> Result<Report, CliError> {
    let text = fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid manifest: {e}", path.display())))?;
    let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut report = Report::new("suite");
    report.input("manifest", path.display().to_string());
    report.input("cases", manifest.cases.iter().map(|c| c.name.as_str()).collect::<Vec<_>>());
    if manifest.cases.is_empty() {
        report.warn("manifest lists no cases; nothing was checked");
    }
    for case in &manifest.cases {
        let loaded = load(&dir, case)?;
        let eval = Evaluator {
            case: &loaded,
            tol,
            stop,
        };
        let mut actuals = BTreeMap::new();
        for (key, exp) in &case.expected {
            let (actual, pass, tolerance) = match eval.evaluate(key) {
                Ok(actual) => {
                    let (pass, tolerance) = compare(&exp.value, &actual, exp.tol);
                    (actual, pass, tolerance)
                }
                Err(message) => (json!({ "error": message }), false, exp.tol),
            };
            actuals.insert(key.clone(), actual.clone());
            report.push(Check {
                name: format!("{}/{key}", case.name),
                expected: exp.value.clone(),
                actual,
                tolerance,
                pass,
                provenance: Some(exp.provenance.clone()),
            });
        }
        report.result(&case.name, actuals);
    }
    Ok(report)
}

/// Class names accepted in manifests, for validation messages.
pub fn class_names() -> Vec<&'static str> {
    [
        SplitClass::NotProper,
        SplitClass::Proper,
        SplitClass::ProperNonnegative,
        SplitClass::ProperWeakRegular,
        SplitClass::ProperRegular,
    ]
    .iter()
    .map(|c| c.name())
    .collect()
}

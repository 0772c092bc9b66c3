//! Per-check records, scenario reports and suite execution.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checks;
use crate::scenario::{Resolved, Scenario, ScenarioError};

pub const SCHEMA_VERSION: &str = "1.0";

/// A sampled curve for plot tables, e.g. (t_k, q_k) or (s, Per_L(F_s)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub series: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub diagnostics: BTreeMap<String, Value>,
    pub curves: Vec<Curve>,
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, lhs: Option<f64>, rhs: Option<f64>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual: Some(residual),
            tolerance,
            pass: residual <= tolerance,
            diagnostics: BTreeMap::new(),
            curves: Vec::new(),
            error: None,
        }
    }

    pub fn failed(name: impl Into<String>, tolerance: f64, error: impl ToString) -> Self {
        Self {
            name: name.into(),
            lhs: None,
            rhs: None,
            residual: None,
            tolerance,
            pass: false,
            diagnostics: BTreeMap::new(),
            curves: Vec::new(),
            error: Some(error.to_string()),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }

    pub fn with_curve(mut self, series: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        self.curves.push(Curve { series: series.into(), x, y });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub environment: Environment,
    pub scenario: Scenario,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Parses a report, refusing a different major schema version.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let found = v.get("schema_version").and_then(Value::as_str).ok_or("report has no schema_version")?;
        let major = |s: &str| s.split('.').next().unwrap_or("").to_string();
        if major(found) != major(SCHEMA_VERSION) {
            return Err(format!("report schema version {found} is incompatible with {SCHEMA_VERSION}"));
        }
        serde_json::from_value(v).map_err(|e| e.to_string())
    }
}

pub fn load_report(path: &Path) -> Result<Report, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Report::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Runs the requested checks of one scenario in their canonical order.
pub fn run_scenario(r: &Resolved) -> Report {
    let mut wanted = r.scenario.checks.clone();
    wanted.sort();
    wanted.dedup();
    let checks = wanted.into_iter().flat_map(|c| checks::run(c, r)).collect();
    Report {
        schema_version: SCHEMA_VERSION.to_string(),
        environment: Environment::current(),
        scenario: r.scenario.clone(),
        checks,
    }
}

/// Runs every scenario concurrently; reports come back ordered by
/// identifier. Duplicate identifiers are rejected.
pub fn run_suite(scenarios: &[Resolved]) -> Result<Vec<Report>, ScenarioError> {
    let mut ids: Vec<&str> = scenarios.iter().map(|s| s.scenario.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ScenarioError::Invalid { id: w[0].to_string(), message: "identifier used twice in the suite".into() });
    }
    let mut reports: Vec<Report> = scenarios.par_iter().map(run_scenario).collect();
    reports.sort_by(|a, b| a.scenario.id.cmp(&b.scenario.id));
    Ok(reports)
}

/// (checks passed, checks run) over a suite.
pub fn tally(reports: &[Report]) -> (usize, usize) {
    let all = reports.iter().flat_map(|r| &r.checks);
    let total = all.clone().count();
    (all.filter(|c| c.pass).count(), total)
}

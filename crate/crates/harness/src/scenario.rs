//! Scenario files: a TOML document naming f, g, bodies, the checks to run
//! and their tolerances.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lcgeom::variation::Schedule;
use lcgeom::{ConvexBody, LogConcaveFn, QuadratureSpec};

use crate::catalog::{BodySpec, FunctionSpec};

#[derive(Debug)]
pub enum ScenarioError {
    Io { path: String, message: String },
    Parse { path: String, message: String },
    Invalid { id: String, message: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, message } => write!(f, "{path}: {message}"),
            Self::Parse { path, message } => write!(f, "{path}: schema error: {message}"),
            Self::Invalid { id, message } => write!(f, "scenario {id}: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    MainTheorem,
    Coarea,
    Quermass,
    Centering,
    Scaling,
    Pointwise,
    Truncation,
    UniquenessSanity,
    DivergencePairing,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        Self::MainTheorem,
        Self::Coarea,
        Self::Quermass,
        Self::Centering,
        Self::Scaling,
        Self::Pointwise,
        Self::Truncation,
        Self::UniquenessSanity,
        Self::DivergencePairing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::MainTheorem => "main-theorem",
            Self::Coarea => "coarea",
            Self::Quermass => "quermass",
            Self::Centering => "centering",
            Self::Scaling => "scaling",
            Self::Pointwise => "pointwise",
            Self::Truncation => "truncation",
            Self::UniquenessSanity => "uniqueness-sanity",
            Self::DivergencePairing => "divergence-pairing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub main_theorem: f64,
    pub main_theorem_refined: f64,
    pub concavity: f64,
    pub coarea_1d: f64,
    pub coarea_2d: f64,
    pub quermass: f64,
    pub exact: f64,
    pub scaling: f64,
    pub pointwise_abs: f64,
    pub pointwise_rel: f64,
    pub truncation: f64,
    pub uniqueness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            main_theorem: 1e-2,
            main_theorem_refined: 1e-3,
            concavity: 1e-6,
            coarea_1d: 1e-2,
            coarea_2d: 3e-2,
            quermass: 1e-8,
            exact: 1e-6,
            scaling: 1e-3,
            pointwise_abs: 1e-3,
            pointwise_rel: 1e-2,
            truncation: 1e-2,
            uniqueness: 1e-2,
        }
    }
}

impl Tolerances {
    /// Every tolerance set to `tol`; the pointwise relative bound to 10·tol.
    pub fn uniform(tol: f64) -> Self {
        Self {
            main_theorem: tol,
            main_theorem_refined: tol,
            concavity: tol,
            coarea_1d: tol,
            coarea_2d: tol,
            quermass: tol,
            exact: tol,
            scaling: tol,
            pointwise_abs: tol,
            pointwise_rel: 10.0 * tol,
            truncation: tol,
            uniqueness: tol,
        }
    }

    fn all(&self) -> [f64; 12] {
        [
            self.main_theorem,
            self.main_theorem_refined,
            self.concavity,
            self.coarea_1d,
            self.coarea_2d,
            self.quermass,
            self.exact,
            self.scaling,
            self.pointwise_abs,
            self.pointwise_rel,
            self.truncation,
            self.uniqueness,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub order: usize,
    pub panels: usize,
    pub boundary_order: usize,
    pub boundary_panels: usize,
    pub tail_tol: f64,
    pub rel_tol: f64,
    pub jitter: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let s = QuadratureSpec::default();
        Self {
            order: s.order,
            panels: s.panels,
            boundary_order: s.boundary_order,
            boundary_panels: s.boundary_panels,
            tail_tol: s.tail_tol,
            rel_tol: s.rel_tol,
            jitter: s.jitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// t_k = 2^{−k}, k = 0..=depth.
    pub depth: usize,
    pub refined_depth: usize,
    /// Exponents of the pointwise schedule 2^{−first} .. 2^{−last}.
    pub pointwise_first: usize,
    pub pointwise_last: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self { depth: 12, refined_depth: 16, pointwise_first: 4, pointwise_last: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoareaOptions {
    /// Nodes per axis of the sampling lattice.
    pub nodes: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// CSV grid field used instead of sampling f.
    pub field: Option<String>,
    /// Also run at twice the spacing and report the residual ratio.
    pub halving: bool,
}

impl Default for CoareaOptions {
    fn default() -> Self {
        Self { nodes: 257, lo: Vec::new(), hi: Vec::new(), field: None, halving: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    pub coarea: CoareaOptions,
    pub pointwise_points: usize,
    pub scaling_constants: Vec<f64>,
    pub truncation_radii: Vec<f64>,
    /// Reference δ(f,g) for the truncation check; the measure formula when
    /// absent.
    pub truncation_expected: Option<f64>,
    pub uniqueness_shift: Vec<f64>,
    /// Expected (W_0, …, W_n) for the quermass check.
    pub quermass_expected: Vec<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            coarea: CoareaOptions::default(),
            pointwise_points: 20,
            scaling_constants: vec![-2.0, 1.0],
            truncation_radii: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            truncation_expected: None,
            uniqueness_shift: Vec::new(),
            quermass_expected: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bodies {
    /// Anisotropy body for coarea and pairing checks.
    pub l: Option<BodySpec>,
    /// Body K of the quermass check.
    pub k: Option<BodySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub f: FunctionSpec,
    #[serde(default)]
    pub g: Option<FunctionSpec>,
    #[serde(default)]
    pub bodies: Bodies,
    pub checks: Vec<CheckName>,
    /// Seed of the jittered sample points.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub options: Options,
}

/// Scenario with its functions and bodies constructed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub f: LogConcaveFn,
    pub g: Option<LogConcaveFn>,
    pub l: Option<ConvexBody>,
    pub k: Option<ConvexBody>,
    pub spec: QuadratureSpec,
}

impl Scenario {
    /// A scenario with default tolerances, quadrature, schedules and options.
    pub fn new(id: impl Into<String>, f: FunctionSpec, checks: Vec<CheckName>) -> Self {
        Self {
            id: id.into(),
            description: String::new(),
            f,
            g: None,
            bodies: Bodies::default(),
            checks,
            seed: None,
            tolerances: Tolerances::default(),
            quadrature: QuadratureConfig::default(),
            schedule: ScheduleConfig::default(),
            options: Options::default(),
        }
    }

    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse { path: origin.to_string(), message: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn invalid(&self, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid { id: self.id.clone(), message: message.into() }
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let q = &self.quadrature;
        QuadratureSpec {
            order: q.order,
            panels: q.panels,
            boundary_order: q.boundary_order,
            boundary_panels: q.boundary_panels,
            tail_tol: q.tail_tol,
            rel_tol: q.rel_tol,
            seed: self.seed.unwrap_or(QuadratureSpec::default().seed),
            jitter: q.jitter,
        }
    }

    pub fn default_schedule(&self) -> lcgeom::Result<Schedule> {
        Schedule::geometric(self.schedule.depth)
    }

    pub fn refined_schedule(&self) -> lcgeom::Result<Schedule> {
        Schedule::geometric(self.schedule.refined_depth)
    }

    pub fn pointwise_schedule(&self) -> lcgeom::Result<Schedule> {
        Schedule::dyadic(self.schedule.pointwise_first, self.schedule.pointwise_last)
    }

    pub fn wants(&self, c: CheckName) -> bool {
        self.checks.contains(&c)
    }

    /// Builds f, g and the bodies and checks the scenario's invariants,
    /// including 0 < ∫f < ∞.
    pub fn resolve(&self) -> Result<Resolved, ScenarioError> {
        if self.id.trim().is_empty() {
            return Err(self.invalid("identifier must not be empty"));
        }
        if self.checks.is_empty() {
            return Err(self.invalid("no checks requested"));
        }
        if self.tolerances.all().iter().any(|t| !(*t >= 0.0)) {
            return Err(self.invalid("tolerances must be nonnegative numbers"));
        }
        if self.wants(CheckName::Pointwise) && self.seed.is_none() {
            return Err(self.invalid("the pointwise check jitters its sample points and needs a seed"));
        }
        let err = |what: &str, e: lcgeom::Error| self.invalid(format!("{what}: {e}"));
        let f = self.f.build().map_err(|e| err("f", e))?;
        f.check_integrable().map_err(|e| err("f", e))?;
        let g = self.g.as_ref().map(|g| g.build()).transpose().map_err(|e| err("g", e))?;
        let l = self.bodies.l.as_ref().map(|b| b.build()).transpose().map_err(|e| err("bodies.l", e))?;
        let k = self.bodies.k.as_ref().map(|b| b.build()).transpose().map_err(|e| err("bodies.k", e))?;
        let n = f.dim();
        for (name, d) in [
            ("g", g.as_ref().map(|g| g.dim())),
            ("bodies.l", l.as_ref().map(|b| b.dim())),
            ("bodies.k", k.as_ref().map(|b| b.dim())),
        ] {
            if let Some(d) = d {
                if d != n {
                    return Err(self.invalid(format!("{name} has dimension {d}, f has {n}")));
                }
            }
        }
        let needs_g = [CheckName::MainTheorem, CheckName::Scaling, CheckName::Pointwise, CheckName::Truncation];
        if let Some(c) = needs_g.iter().find(|c| self.wants(**c)) {
            if g.is_none() {
                return Err(self.invalid(format!("check {} needs g", c.as_str())));
            }
        }
        if self.wants(CheckName::Coarea) && l.is_none() {
            return Err(self.invalid("check coarea needs bodies.l"));
        }
        if self.wants(CheckName::Quermass) && (k.is_none() || l.is_none()) {
            return Err(self.invalid("check quermass needs bodies.k and bodies.l"));
        }
        for s in [self.default_schedule(), self.refined_schedule(), self.pointwise_schedule()] {
            s.map_err(|e| err("schedule", e))?;
        }
        Ok(Resolved { scenario: self.clone(), f, g, l, k, spec: self.quadrature_spec() })
    }
}

/// Reads, parses and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Resolved, ScenarioError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: shown.clone(), message: e.to_string() })?;
    Scenario::from_toml(&text, &shown)?.resolve()
}

/// Scenario files of a directory in name order, or the file itself.
pub fn scenario_paths(path: &Path) -> Result<Vec<std::path::PathBuf>, ScenarioError> {
    let io = |e: std::io::Error| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() };
    if path.is_dir() {
        let mut v: Vec<_> = std::fs::read_dir(path)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        v.sort();
        Ok(v)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(io(std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
id = "minimal"
f = { form = "gaussian", dim = 1 }
g = { form = "indicator", body = { kind = "interval", lo = -1.0, hi = 1.0 } }
checks = ["main-theorem"]
"#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = Scenario::from_toml(MINIMAL, "inline").unwrap();
        assert_eq!(s.tolerances, Tolerances::default());
        assert_eq!(s.schedule.depth, 12);
        let r = s.resolve().unwrap();
        assert_eq!(r.f.dim(), 1);
        assert!(r.g.is_some());
    }

    #[test]
    fn round_trip_through_toml() {
        let s = Scenario::from_toml(MINIMAL, "inline").unwrap();
        assert_eq!(Scenario::from_toml(&s.to_toml(), "again").unwrap(), s);
    }

    #[test]
    fn unknown_form_names_the_field() {
        let text = MINIMAL.replace("gaussian", "banana");
        let e = Scenario::from_toml(&text, "inline").unwrap_err().to_string();
        assert!(e.contains("banana") && e.contains("schema error"), "{e}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = format!("{MINIMAL}\nspeed = 3\n");
        assert!(Scenario::from_toml(&text, "inline").unwrap_err().to_string().contains("speed"));
    }

    #[test]
    fn zero_function_is_rejected_at_load() {
        let text = MINIMAL.replace(r#"{ form = "gaussian", dim = 1 }"#, r#"{ form = "zero", dim = 1 }"#);
        let e = Scenario::from_toml(&text, "inline").unwrap().resolve().unwrap_err().to_string();
        assert!(e.contains("integral not in (0,∞)"), "{e}");
    }

    #[test]
    fn pointwise_needs_a_seed() {
        let text = MINIMAL.replace(r#"["main-theorem"]"#, r#"["pointwise"]"#);
        let s = Scenario::from_toml(&text, "inline").unwrap();
        assert!(s.resolve().unwrap_err().to_string().contains("seed"));
        let seeded = Scenario { seed: Some(3), ..s };
        assert!(seeded.resolve().is_ok());
    }

    #[test]
    fn missing_g_is_reported() {
        let text = MINIMAL.replace("g = {", "# g = {");
        let e = Scenario::from_toml(&text, "inline").unwrap().resolve().unwrap_err().to_string();
        assert!(e.contains("needs g"), "{e}");
    }
}

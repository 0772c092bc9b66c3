//! Closed-form functions and bodies a scenario can name.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use lcgeom::{ConvexBody, Error, LogConcaveFn, Potential, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Interval { lo: f64, hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    UnitBall { dim: usize },
    Polytope { vertices: Vec<Vec<f64>> },
    /// {x : (x − c)ᵀ A⁻¹ (x − c) ≤ 1}, A given by rows.
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// e^{−|x|²/2}.
    Gaussian { dim: usize },
    /// e^{−½(x − m)ᵀA(x − m)}, A given by rows.
    GaussianWith { mean: Vec<f64>, matrix: Vec<Vec<f64>> },
    Indicator { body: BodySpec },
    /// e^{−Σxᵢ} on the positive orthant.
    HalfExponential { dim: usize },
    /// e^{−α|x|^p}.
    Power { dim: usize, alpha: f64, p: f64 },
    /// exp(−scale·(1/(1 − |x|²/radius²) − 1)) on the open ball.
    Barrier { dim: usize, radius: f64, scale: f64 },
    /// e^{−⟨b,x⟩ − c} on a body.
    LinearOn { slope: Vec<f64>, offset: f64, body: BodySpec },
    /// The zero function.
    Zero { dim: usize },
    /// x ↦ of(x − by).
    Translated { by: Vec<f64>, of: Box<FunctionSpec> },
    /// e^c·of.
    Scaled { c: f64, of: Box<FunctionSpec> },
    /// of·𝟙_body.
    Restricted { body: BodySpec, of: Box<FunctionSpec> },
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix must be square and given by rows".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            Self::Interval { lo, hi } => ConvexBody::interval(*lo, *hi),
            Self::Box { lo, hi } => ConvexBody::axis_box(lo.clone(), hi.clone()),
            Self::Ball { center, radius } => ConvexBody::ball(center.clone(), *radius),
            Self::UnitBall { dim } => Ok(ConvexBody::unit_ball(*dim)),
            Self::Polytope { vertices } => ConvexBody::polytope(vertices),
            Self::Ellipsoid { center, shape } => ConvexBody::ellipsoid(center.clone(), matrix(shape)?),
        }
    }
}

impl FunctionSpec {
    pub fn build(&self) -> Result<LogConcaveFn> {
        match self {
            Self::Gaussian { dim } => Ok(LogConcaveFn::gaussian(*dim)),
            Self::GaussianWith { mean, matrix: a } => LogConcaveFn::gaussian_with(mean.clone(), matrix(a)?),
            Self::Indicator { body } => Ok(LogConcaveFn::indicator(body.build()?)),
            Self::HalfExponential { dim } => Ok(LogConcaveFn::half_exponential(*dim)),
            Self::Power { dim, alpha, p } => LogConcaveFn::power(*dim, *alpha, *p),
            Self::Barrier { dim, radius, scale } => LogConcaveFn::barrier(*dim, *radius, *scale),
            Self::LinearOn { slope, offset, body } => LogConcaveFn::linear_on(slope.clone(), *offset, body.build()?),
            Self::Zero { dim } => LogConcaveFn::new(Potential::constant(*dim, f64::INFINITY)),
            Self::Translated { by, of } => of.build()?.translate(by),
            Self::Scaled { c, of } => of.build()?.scale_exp(*c),
            Self::Restricted { body, of } => of.build()?.restrict(&body.build()?),
        }
    }
}

/// (form, parameters, description) of every catalog entry.
pub const FUNCTION_FORMS: &[(&str, &str, &str)] = &[
    ("gaussian", "dim", "e^{-|x|^2/2}"),
    ("gaussian-with", "mean, matrix", "e^{-(x-m)^T A (x-m)/2}, A symmetric positive definite"),
    ("indicator", "body", "indicator of a convex body"),
    ("half-exponential", "dim", "e^{-x_1-...-x_n} on the positive orthant"),
    ("power", "dim, alpha, p", "e^{-alpha |x|^p}, p >= 1"),
    ("barrier", "dim, radius, scale", "exp(-scale (1/(1-|x|^2/radius^2) - 1)) on the open ball"),
    ("linear-on", "slope, offset, body", "e^{-<b,x>-c} on a convex body"),
    ("zero", "dim", "the zero function (rejected by every check)"),
    ("translated", "by, of", "x -> of(x - by)"),
    ("scaled", "c, of", "e^c times of"),
    ("restricted", "body, of", "of times the indicator of body"),
];

pub const BODY_KINDS: &[(&str, &str)] = &[
    ("interval", "lo, hi"),
    ("box", "lo, hi"),
    ("ball", "center, radius"),
    ("unit-ball", "dim"),
    ("polytope", "vertices"),
    ("ellipsoid", "center, shape"),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_build() {
        let tri = BodySpec::Polytope { vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]] };
        assert!((tri.build().unwrap().volume().unwrap() - 0.5).abs() < 1e-15);
        let f = FunctionSpec::Translated { by: vec![2.0], of: Box::new(FunctionSpec::Gaussian { dim: 1 }) };
        assert!((f.build().unwrap().evaluate(&[2.0]) - 1.0).abs() < 1e-15);
        let s = FunctionSpec::Scaled { c: 1.0, of: Box::new(FunctionSpec::Gaussian { dim: 1 }) };
        assert!((s.build().unwrap().evaluate(&[0.0]) - std::f64::consts::E).abs() < 1e-14);
        let bad = BodySpec::Ellipsoid { center: vec![0.0, 0.0], shape: vec![vec![1.0, 0.0]] };
        assert!(bad.build().is_err());
    }

    #[test]
    fn catalog_lists_every_form() {
        assert_eq!(FUNCTION_FORMS.len(), 11);
        assert_eq!(BODY_KINDS.len(), 6);
    }
}

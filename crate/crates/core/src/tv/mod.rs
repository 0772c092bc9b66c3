//! Anisotropic total variation TV_L(f) = sup{∫f divΦ : ‖Φ‖_L ≤ 1}, on
//! sampled fields and through the measures of f; level sets and the coarea
//! formula TV_L(f) = ∫Per_L(F_s) ds.

mod grid;
mod levels;

pub use grid::{tv_grid, GridField, MARGIN};
pub use levels::{coarea_check, coarea_check_grid, coarea_check_sampled, level_set, level_set_grid, perimeter, CoareaCheck, LevelGrid};

use std::sync::atomic::{AtomicBool, Ordering};

use crate::bodies::ConvexBody;
use crate::convex::{Clipped, LogConcaveFn, QuadratureSpec};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, compensated_sum, dot};
use crate::measures::{boundary_rule, build_mu, build_nu};
use crate::quadrature::integrate_adaptive;

/// TV_L(f) split into ∫h_L(∇φ) f dx and ∫_{∂K_f} h_L(n) f dH^{n−1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TVDecomposition {
    pub absolutely_continuous: f64,
    pub boundary: f64,
}

impl TVDecomposition {
    pub fn total(&self) -> f64 {
        self.absolutely_continuous + self.boundary
    }
}

pub fn tv_representation(f: &LogConcaveFn, l: &ConvexBody, spec: &QuadratureSpec) -> Result<TVDecomposition> {
    check_dim(f.dim(), l.dim())?;
    if !l.origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    let mu = build_mu(f, spec)?;
    let nu = build_nu(f, spec)?;
    Ok(TVDecomposition {
        absolutely_continuous: mu.integrate_par(|y| l.support(y)),
        boundary: nu.integrate(|theta| l.support(theta)),
    })
}

/// Smooth compactly supported field Φ(x) = b(x)·(M(x − c) + v) with the
/// bump b(x) = (1 − |x − c|²/r²)³ on the ball B(c, r).
#[derive(Debug, Clone, PartialEq)]
pub struct TestField {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Row-major n×n.
    pub matrix: Vec<f64>,
    pub vector: Vec<f64>,
}

impl TestField {
    pub fn new(center: Vec<f64>, radius: f64, matrix: Vec<f64>, vector: Vec<f64>) -> Result<Self> {
        let n = center.len();
        check_dim(n * n, matrix.len())?;
        check_dim(n, vector.len())?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument("test field radius must be positive".into()));
        }
        Ok(Self { center, radius, matrix, vector })
    }

    pub fn zero(n: usize) -> Self {
        Self { center: vec![0.0; n], radius: 1.0, matrix: vec![0.0; n * n], vector: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn direction(&self, d: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| dot(&self.matrix[i * n..(i + 1) * n], d) + self.vector[i]).collect()
    }

    fn rho(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let d = linalg::sub(x, &self.center);
        let rho = dot(&d, &d) / (self.radius * self.radius);
        (d, rho)
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        let (d, rho) = self.rho(x);
        if rho >= 1.0 {
            return vec![0.0; self.dim()];
        }
        linalg::scale(&self.direction(&d), (1.0 - rho).powi(3))
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        let (d, rho) = self.rho(x);
        if rho >= 1.0 {
            return 0.0;
        }
        let n = self.dim();
        let trace: f64 = (0..n).map(|i| self.matrix[i * n + i]).sum();
        let grad_b = linalg::scale(&d, -6.0 * (1.0 - rho).powi(2) / (self.radius * self.radius));
        dot(&grad_b, &self.direction(&d)) + (1.0 - rho).powi(3) * trace
    }

    /// Largest ‖Φ(x)‖_L over a sampling of the ball.
    pub fn max_gauge(&self, l: &ConvexBody) -> Result<f64> {
        let n = self.dim();
        let per_axis = if n == 1 { 2001 } else { 201 };
        let lo: Vec<f64> = self.center.iter().map(|c| c - self.radius).collect();
        let hi: Vec<f64> = self.center.iter().map(|c| c + self.radius).collect();
        let mut worst: f64 = 0.0;
        for x in crate::convex::sample_points(&lo, &hi, per_axis) {
            worst = worst.max(l.gauge(&self.value(&x))?);
        }
        Ok(worst)
    }

    /// The field scaled so that ‖Φ‖_L ≤ 1 with a 5% margin for sampling.
    pub fn scaled_into(&self, l: &ConvexBody) -> Result<Self> {
        let m = self.max_gauge(l)?;
        if m == 0.0 {
            return Ok(self.clone());
        }
        let s = 1.0 / (1.05 * m);
        Ok(Self {
            matrix: self.matrix.iter().map(|v| v * s).collect(),
            vector: self.vector.iter().map(|v| v * s).collect(),
            ..self.clone()
        })
    }

    /// Five fixed fields in dimension n ∈ {1, 2}: a constant direction, a
    /// radial field, a rotational one and two off-center affine ones.
    pub fn catalog(n: usize) -> Result<Vec<Self>> {
        let pick = |v: &[f64]| -> Vec<f64> {
            match n {
                1 => vec![v[0]],
                2 => v.to_vec(),
                _ => unreachable!(),
            }
        };
        let mat = |m: [f64; 4]| -> Vec<f64> {
            match n {
                1 => vec![m[0]],
                _ => m.to_vec(),
            }
        };
        if !(1..=2).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(vec![
            Self::new(pick(&[0.0, 0.0]), 2.0, mat([0.0; 4]), pick(&[1.0, 0.0]))?,
            Self::new(pick(&[0.0, 0.0]), 3.0, mat([1.0, 0.0, 0.0, 1.0]), pick(&[0.0, 0.0]))?,
            Self::new(pick(&[0.0, 0.0]), 2.5, mat([-1.0, -1.0, 1.0, 0.0]), pick(&[0.5, 0.2]))?,
            Self::new(pick(&[0.5, 0.5]), 1.5, mat([1.0, 0.0, 0.0, -2.0]), pick(&[-1.0, 1.0]))?,
            Self::new(pick(&[1.0, -0.5]), 4.0, mat([0.3, 0.1, 0.2, -0.4]), pick(&[0.2, -0.7]))?,
        ])
    }
}

/// The three integrals of ∫f divΦ = −∫⟨∇f, Φ⟩ + ∫_{∂K_f} f⟨Φ, n⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingCheck {
    pub lhs: f64,
    pub volume_term: f64,
    pub boundary_term: f64,
}

impl PairingCheck {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.volume_term - self.boundary_term).abs()
    }
}

pub fn divergence_pairing_check(f: &LogConcaveFn, phi: &TestField, spec: &QuadratureSpec) -> Result<PairingCheck> {
    check_dim(f.dim(), phi.dim())?;
    let mass = f.check_integrable()?;
    let region = Clipped::new(f.support(), &phi.center, phi.radius);
    let lhs = integrate_adaptive(&region, &|x: &[f64]| f.evaluate(x) * phi.divergence(x), mass, spec.rel_tol)?;
    // −∇f = f∇φ inside the support
    let p = f.potential();
    let bad = AtomicBool::new(false);
    let volume = integrate_adaptive(
        &region,
        &|x: &[f64]| {
            let v = f.evaluate(x);
            if v == 0.0 {
                return 0.0;
            }
            let w = phi.value(x);
            if w.iter().all(|c| *c == 0.0) {
                return 0.0;
            }
            match p.gradient(x) {
                Ok(g) => v * dot(&g.value, &w),
                Err(_) => {
                    bad.store(true, Ordering::Relaxed);
                    0.0
                }
            }
        },
        mass,
        spec.rel_tol,
    )?;
    let nodes = boundary_rule(f.support(), spec, &phi.center, phi.radius)?;
    let boundary = compensated_sum(nodes.iter().map(|b| b.weight * f.evaluate(&b.point) * dot(&phi.value(&b.point), &b.normal)));
    if bad.load(Ordering::Relaxed) {
        return Err(Error::Quadrature("gradient unavailable inside the support".into()));
    }
    Ok(PairingCheck { lhs: lhs.value, volume_term: volume.value, boundary_term: boundary })
}

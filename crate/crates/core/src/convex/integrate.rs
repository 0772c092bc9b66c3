//! ∫f over ℝⁿ: exact volumes for flat indicators, otherwise nested adaptive
//! Gauss–Kronrod over the support clipped to an envelope-certified box.

use super::function::LogConcaveFn;
use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, tensor_nodes, Estimate, GaussLegendre, Sections};

/// Quadrature parameters shared by integration and measure construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre order per panel for tensor rules.
    pub order: usize,
    /// Panels per axis for tensor rules.
    pub panels: usize,
    /// Gauss–Legendre order per boundary panel.
    pub boundary_order: usize,
    pub boundary_panels: usize,
    /// Relative tail mass discarded by truncation.
    pub tail_tol: f64,
    /// Relative target of adaptive integration.
    pub rel_tol: f64,
    pub seed: u64,
    /// Node jitter as a fraction of the domain extent.
    pub jitter: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 8,
            panels: 96,
            boundary_order: 16,
            boundary_panels: 16,
            tail_tol: 1e-10,
            rel_tol: 1e-12,
            seed: 7,
            jitter: 1e-9,
        }
    }
}

impl QuadratureSpec {
    /// Tensor panels per axis, reduced in higher dimensions.
    pub fn panels_for(&self, n: usize) -> usize {
        match n {
            1 => self.panels * 4,
            2 => self.panels,
            _ => (self.panels / 4).max(8),
        }
    }
}

/// Support of f clipped to a box, described section by section.
pub(crate) struct Clipped<'a> {
    pub body: &'a ConvexBody,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub center: Vec<f64>,
    pub kinks: Vec<Vec<f64>>,
}

impl Sections for Clipped<'_> {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn section(&self, prefix: &[f64], k: usize) -> Option<(f64, f64)> {
        let (a, b) = self.body.section(prefix, k)?;
        let lo = a.max(self.lo[k]);
        let hi = b.min(self.hi[k]);
        (hi > lo).then_some((lo, hi))
    }

    fn split(&self, k: usize) -> Option<f64> {
        Some(self.center[k])
    }

    fn breaks(&self, k: usize) -> Vec<f64> {
        let mut b = vec![self.center[k]];
        b.extend(self.kinks.get(k).into_iter().flatten().copied());
        b
    }
}

impl<'a> Clipped<'a> {
    pub fn new(body: &'a ConvexBody, center: &[f64], radius: f64) -> Self {
        Self {
            body,
            lo: center.iter().map(|c| c - radius).collect(),
            hi: center.iter().map(|c| c + radius).collect(),
            center: center.to_vec(),
            kinks: Vec::new(),
        }
    }

    pub fn with_kinks(mut self, kinks: Vec<Vec<f64>>) -> Self {
        self.kinks = kinks;
        self
    }
}

/// Coarse tensor estimate of ∫f over the clipped region.
fn coarse(f: &LogConcaveFn, region: &Clipped) -> Result<f64> {
    let rule = GaussLegendre::new(6)?;
    let panels = match f.dim() {
        1 => 64,
        2 => 24,
        _ => 8,
    };
    let mut s = 0.0;
    tensor_nodes(region, &rule, panels, &mut |x, w| s += w * f.evaluate(x));
    Ok(s)
}

/// Truncation radius around the envelope anchor with relative tail ≤ tol.
pub fn truncation_radius(f: &LogConcaveFn, tol: f64) -> Result<f64> {
    let env = f.envelope()?;
    let mut r = env.radius_for(1e-3 * env.a_center);
    for _ in 0..8 {
        let mass = coarse(f, &Clipped::new(f.support(), &env.center, r))?;
        if !(mass > 0.0) {
            return Err(Error::ZeroFunction);
        }
        let next = env.radius_for(tol * mass);
        if next <= r {
            return Ok(r);
        }
        r = next;
    }
    Ok(r)
}

/// ∫f with the tail beyond the truncation box bounded by `spec.tail_tol`
/// relative to the result.
pub fn integrate(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<Estimate> {
    if let Some(c) = f.potential().flat_value() {
        if f.support().is_bounded() {
            let v = (-c).exp() * f.support().volume()?;
            if !(v > 0.0) {
                return Err(Error::ZeroFunction);
            }
            return Ok(Estimate { value: v, error: 0.0, converged: true });
        }
    }
    let env = f.envelope().map_err(|e| match e {
        Error::NoEnvelope => Error::Divergent("no exponential envelope: ∫f = ∞".into()),
        other => other,
    })?;
    let r = truncation_radius(f, spec.tail_tol)?;
    integrate_within(f, &env.center, r, spec.rel_tol)
}

/// ∫f over the support clipped to the box center ± radius.
pub fn integrate_within(f: &LogConcaveFn, center: &[f64], radius: f64, rel_tol: f64) -> Result<Estimate> {
    let kinks = (0..f.dim()).map(|k| f.potential().breakpoints(k)).collect();
    let region = Clipped::new(f.support(), center, radius).with_kinks(kinks);
    let scale = coarse(f, &region)?;
    if !(scale > 0.0) {
        return Err(Error::ZeroFunction);
    }
    let est = integrate_adaptive(&region, &|x: &[f64]| f.evaluate(x), scale, rel_tol)?;
    if !(est.value > 0.0) {
        return Err(Error::ZeroFunction);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_is_exact() {
        let f = LogConcaveFn::indicator(ConvexBody::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        assert_eq!(f.integral().unwrap(), 1.0);
    }

    #[test]
    fn gaussian_and_half_exponential() {
        let g = LogConcaveFn::gaussian(1);
        assert_relative_eq!(g.integral().unwrap(), (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-10);
        let h = LogConcaveFn::half_exponential(1);
        assert_relative_eq!(h.integral().unwrap(), 1.0, max_relative = 1e-10);
        let g2 = LogConcaveFn::gaussian(2);
        assert_relative_eq!(g2.integral().unwrap(), 2.0 * std::f64::consts::PI, max_relative = 1e-10);
        let h2 = LogConcaveFn::half_exponential(2);
        assert_relative_eq!(h2.integral().unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn radial_exponential_and_barrier() {
        let e = LogConcaveFn::power(2, 1.0, 1.0).unwrap();
        assert_relative_eq!(e.integral().unwrap(), 2.0 * std::f64::consts::PI, max_relative = 1e-9);
        let b = LogConcaveFn::barrier(1, 1.0, 1.0).unwrap();
        // ∫_{−1}^{1} exp(−(1/(1−x²) − 1)) dx by a dense midpoint rule
        let m = 2_000_000;
        let oracle: f64 = (0..m)
            .map(|i| {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / m as f64;
                (-(1.0 / (1.0 - x * x) - 1.0)).exp() * 2.0 / m as f64
            })
            .sum();
        assert_relative_eq!(b.integral().unwrap(), oracle, max_relative = 1e-8);
    }

    #[test]
    fn zero_and_divergent_inputs() {
        let z = LogConcaveFn::new(crate::convex::Potential::constant(1, f64::INFINITY)).unwrap();
        assert!(matches!(z.check_integrable(), Err(Error::IntegralOutOfRange(_))));
        let flat = LogConcaveFn::new(crate::convex::Potential::constant(2, 0.0)).unwrap();
        assert!(matches!(flat.check_integrable(), Err(Error::IntegralOutOfRange(_))));
    }
}

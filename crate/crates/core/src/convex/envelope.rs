//! Exponential envelopes f(x) ≤ A e^{−c|x|} and the truncation radius they
//! certify.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::function::LogConcaveFn;
use crate::error::{Error, Result};
use crate::linalg::{self, norm};

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeBound {
    /// Constant for the bound around the origin: f(x) ≤ a·e^{−c|x|}.
    pub a: f64,
    pub c: f64,
    /// Anchor point inside the support and the constant for f(x) ≤
    /// a_center·e^{−c|x − center|}.
    pub center: Vec<f64>,
    pub a_center: f64,
    /// Radius around `center` beyond which every ray was seen increasing.
    pub radius: f64,
}

impl EnvelopeBound {
    pub fn bound(&self, x: &[f64]) -> f64 {
        self.a * (-self.c * norm(x)).exp()
    }

    /// Upper bound for ∫_{|x − center| > r} f.
    pub fn tail(&self, r: f64) -> f64 {
        let n = self.center.len();
        let z = self.c * r;
        // Γ(n, z) for integer n
        let mut poly = 0.0;
        let mut term = 1.0;
        for k in 0..n {
            if k > 0 {
                term *= z / k as f64;
            }
            poly += term;
        }
        let gamma = (1..n).map(|k| k as f64).product::<f64>() * (-z).exp() * poly;
        self.a_center * linalg::sphere_area(n) * gamma / self.c.powi(n as i32)
    }

    /// Smallest radius (a power of two times the anchor radius) whose tail
    /// bound is below `tol`.
    pub fn radius_for(&self, tol: f64) -> f64 {
        let mut r = self.radius.max(1.0);
        while self.tail(r) > tol && r < 1e12 {
            r *= 1.25;
        }
        r
    }
}

const RAY_DOUBLINGS: usize = 60;

fn anchor(f: &LogConcaveFn) -> Result<Vec<f64>> {
    let p = f.potential();
    let mut cands = vec![p.center_hint(), f.support().interior_point()];
    cands.push(vec![0.0; f.dim()]);
    for c in cands {
        if c.iter().all(|v| v.is_finite()) && p.value(&c).is_finite() {
            return Ok(c);
        }
    }
    Err(Error::ZeroFunction)
}

/// Searches along rays from an interior anchor for a positive asymptotic
/// slope of φ and re-verifies the resulting bound on a dense sample.
pub fn exponential_envelope(f: &LogConcaveFn) -> Result<EnvelopeBound> {
    let n = f.dim();
    let p = f.potential();
    let x0 = anchor(f)?;
    let phi0 = p.value(&x0);
    let dirs = linalg::directions(n, if n == 2 { 64 } else { 128 });
    let at = |u: &[f64], r: f64| {
        let x: Vec<f64> = x0.iter().zip(u).map(|(a, b)| a + r * b).collect();
        p.value(&x)
    };
    let mut min_slope = f64::INFINITY;
    let mut reach: f64 = 1.0;
    let mut phi_min = phi0;
    for u in &dirs {
        let mut r = 1.0;
        let mut found = false;
        for _ in 0..RAY_DOUBLINGS {
            let a = at(u, 0.5 * r);
            let b = at(u, r);
            if a.is_finite() {
                phi_min = phi_min.min(a);
            }
            if b.is_infinite() {
                found = true;
                break;
            }
            phi_min = phi_min.min(b);
            // rounding noise on a flat ray is not a slope
            if b - a > 1e-10 * (1.0 + a.abs() + b.abs()) {
                let slope = (b - a) / (0.5 * r);
                min_slope = min_slope.min(slope);
                found = true;
                break;
            }
            r *= 2.0;
        }
        if !found {
            return Err(Error::NoEnvelope);
        }
        reach = reach.max(r);
    }
    if let Some(m) = p.infimum() {
        phi_min = phi_min.min(m);
    }
    let c = if min_slope.is_finite() { 0.9 * min_slope } else { 1.0 };
    let mut a_center = (-phi_min + c * reach).exp();
    // dense verification along the rays and along seeded random directions
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut probes: Vec<Vec<f64>> = dirs.clone();
    for _ in 0..dirs.len() {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = norm(&v).max(1e-12);
        v.iter_mut().for_each(|x| *x /= l);
        probes.push(v);
    }
    let mut worst: f64 = 1.0;
    for u in &probes {
        for j in 0..64 {
            let s = 4.0 * reach * (j as f64 + 0.5) / 64.0;
            let v = at(u, s);
            if v.is_finite() {
                let ratio = (-v).exp() / (a_center * (-c * s).exp());
                worst = worst.max(ratio);
            }
        }
    }
    if worst > 1.0 {
        a_center *= worst * 1.01;
    }
    let a = a_center * (c * norm(&x0)).exp();
    Ok(EnvelopeBound { a, c, center: x0, a_center, radius: reach })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;

    fn check_bound(f: &LogConcaveFn, env: &EnvelopeBound, lo: f64, hi: f64) {
        for i in 0..=2000 {
            let x = lo + (hi - lo) * i as f64 / 2000.0;
            assert!(f.evaluate(&[x]) <= env.bound(&[x]) * (1.0 + 1e-12), "x = {x}");
        }
    }

    #[test]
    fn envelopes_of_catalog_functions() {
        let f = LogConcaveFn::power(1, 1.0, 1.0).unwrap();
        let e = exponential_envelope(&f).unwrap();
        check_bound(&f, &e, -40.0, 40.0);
        // f is its own envelope
        for x in [-3.0, 0.0, 5.0] {
            assert!(f.evaluate(&[x]) <= (-f64::abs(x)).exp() + 1e-15);
        }
        let ind = LogConcaveFn::indicator(ConvexBody::interval(0.0, 1.0).unwrap());
        let e = exponential_envelope(&ind).unwrap();
        check_bound(&ind, &e, -3.0, 3.0);
        for x in [0.0, 0.5, 1.0] {
            assert!(ind.evaluate(&[x]) <= std::f64::consts::E * (-x).exp());
        }
        let g = LogConcaveFn::gaussian(1);
        let e = exponential_envelope(&g).unwrap();
        assert!(e.c > 0.0);
        check_bound(&g, &e, -30.0, 30.0);
        for c in [0.3, 1.0, 2.0] {
            for i in 0..100 {
                let x = -10.0 + 0.2 * i as f64;
                assert!(g.evaluate(&[x]) <= (c * c / 2.0f64).exp() * (-c * f64::abs(x)).exp() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn flat_function_on_the_line_has_no_envelope() {
        let f = LogConcaveFn::new(crate::convex::Potential::constant(1, 0.0)).unwrap();
        assert_eq!(exponential_envelope(&f), Err(Error::NoEnvelope));
    }

    #[test]
    fn tail_bound_is_an_upper_bound() {
        let f = LogConcaveFn::power(2, 1.0, 1.0).unwrap();
        let e = exponential_envelope(&f).unwrap();
        // exact tail of e^{−|x|} outside radius r in the plane: 2π(1+r)e^{−r}
        for r in [1.0, 5.0, 20.0] {
            let exact = 2.0 * std::f64::consts::PI * (1.0 + r) * (-r as f64).exp();
            assert!(e.tail(r) >= exact);
        }
    }
}

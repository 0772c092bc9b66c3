//! Convex bodies: polytopes, balls, boxes, ellipsoids and lazy Minkowski sums.

mod hull;

pub use hull::{Facet, Polytope};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, ball_volume, binomial, dot, norm};
use crate::measures::{DiscreteMeasure, Provenance};

/// Solid ellipsoid `{x : (x−c)ᵀ A⁻¹ (x−c) ≤ 1}` for SPD shape matrix A.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    shape: DMatrix<f64>,
    inv: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: shape.nrows() });
        }
        if !linalg::is_spd(&shape) {
            return Err(Error::InvalidArgument("ellipsoid matrix must be symmetric positive definite".into()));
        }
        let inv = shape.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("singular ellipsoid".into()))?;
        let eig = shape.clone().symmetric_eigen();
        Ok(Self {
            center,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            shape,
            inv,
        })
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn inverse_shape(&self) -> &DMatrix<f64> {
        &self.inv
    }

    fn support(&self, theta: &[f64]) -> f64 {
        dot(&self.center, theta) + linalg::quad_form(&self.shape, theta).max(0.0).sqrt()
    }

    fn level(&self, x: &[f64]) -> f64 {
        let d = linalg::sub(x, &self.center);
        linalg::quad_form(&self.inv, &d)
    }

    fn volume(&self) -> f64 {
        ball_volume(self.center.len()) * self.eigenvalues.iter().product::<f64>().sqrt()
    }

    /// Distance to the ellipsoid via the Lagrange multiplier of the nearest
    /// point problem, solved by bisection in the eigenbasis.
    fn distance(&self, x: &[f64]) -> f64 {
        if self.level(x) <= 1.0 {
            return 0.0;
        }
        let d = DVector::from_column_slice(&linalg::sub(x, &self.center));
        let z = self.eigenvectors.transpose() * d;
        let e = &self.eigenvalues;
        let g = |lam: f64| -> f64 {
            z.iter()
                .zip(e)
                .map(|(zi, ei)| zi * zi * ei / ((ei + lam) * (ei + lam)))
                .sum::<f64>()
                - 1.0
        };
        let mut lo = 0.0;
        let mut hi = 1.0;
        while g(hi) > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lam = 0.5 * (lo + hi);
        z.iter()
            .zip(e)
            .map(|(zi, ei)| {
                let yi = zi * ei / (ei + lam);
                (zi - yi) * (zi - yi)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Range of coordinate k on the slice where the first k coordinates are fixed.
    fn section(&self, prefix: &[f64], k: usize) -> Option<(f64, f64)> {
        let n = self.center.len();
        let q = &self.inv;
        if k == 0 {
            let r = self.shape[(0, 0)].sqrt();
            return Some((self.center[0] - r, self.center[0] + r));
        }
        let m = n - k;
        let dfix = DVector::from_iterator(k, (0..k).map(|i| prefix[i] - self.center[i]));
        let qff = q.view((0, 0), (k, k)).into_owned();
        let qfr = q.view((0, k), (k, m)).into_owned();
        let qrr = q.view((k, k), (m, m)).into_owned();
        let qrr_inv = qrr.clone().try_inverse()?;
        let z0 = -(&qrr_inv * qfr.transpose() * &dfix);
        let schur = &qff - &qfr * &qrr_inv * qfr.transpose();
        let delta = (dfix.transpose() * schur * &dfix)[(0, 0)];
        if delta > 1.0 {
            return None;
        }
        let half = ((1.0 - delta) * qrr_inv[(0, 0)]).max(0.0).sqrt();
        let c = self.center[k] + z0[0];
        Some((c - half, c + half))
    }

    fn gauge(&self, x: &[f64]) -> Result<f64> {
        let qc = linalg::mat_vec(&self.inv, &self.center);
        let a = 1.0 - dot(&self.center, &qc);
        if a <= 1e-12 {
            return Err(Error::OriginNotInterior);
        }
        let b = dot(x, &qc);
        let c = linalg::quad_form(&self.inv, x);
        Ok(((b * b + a * c).max(0.0).sqrt() - b).max(0.0) / a)
    }

    fn scale(&self, t: f64) -> Self {
        Self {
            center: linalg::scale(&self.center, t),
            shape: &self.shape * (t * t),
            inv: &self.inv / (t * t),
            eigenvalues: self.eigenvalues.iter().map(|v| v * t * t).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    fn translate(&self, a: &[f64]) -> Self {
        Self { center: linalg::add(&self.center, a), ..self.clone() }
    }

    fn half_widths(&self) -> Vec<f64> {
        (0..self.center.len()).map(|i| self.shape[(i, i)].sqrt()).collect()
    }
}

/// A closed convex set with non-empty interior. Boxes may have infinite
/// bounds, which is how unbounded supports (half-lines, orthants, ℝⁿ) are
/// represented.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Polytope(Polytope),
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ellipsoid(Ellipsoid),
    /// Minkowski sum kept lazy; built only through [`ConvexBody::minkowski_sum`].
    Sum(Vec<ConvexBody>),
}

/// Relative quermassintegrals W_0..W_n of K with respect to L.
#[derive(Debug, Clone, PartialEq)]
pub struct QuermassVector {
    pub coefficients: Vec<f64>,
    /// Volumes |K + tL| at t = 0, 1, …, n.
    pub node_volumes: Vec<f64>,
    pub fit_residual: f64,
    /// Relative mismatch of the Steiner polynomial at t = 1/2.
    pub held_out_residual: f64,
}

impl QuermassVector {
    /// Steiner polynomial Σ binom(n,k) W_k t^k.
    pub fn steiner(&self, t: f64) -> f64 {
        let n = self.coefficients.len() - 1;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, w)| binomial(n, k) * w * t.powi(k as i32))
            .sum()
    }
}

const MEMBERSHIP_TOL: f64 = 1e-12;

impl ConvexBody {
    pub fn polytope(vertices: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::Polytope(Polytope::hull(vertices)?))
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() || center.len() > linalg::MAX_DIM {
            return Err(Error::UnsupportedDimension(center.len()));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::Ball { center: vec![0.0; n], radius: 1.0 }
    }

    /// Axis-parallel box; bounds may be infinite.
    pub fn axis_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() || lo.len() > linalg::MAX_DIM {
            return Err(Error::UnsupportedDimension(lo.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || a.is_nan() || *a == f64::INFINITY || *b == f64::NEG_INFINITY) {
            return Err(Error::InvalidArgument("box needs lo < hi componentwise".into()));
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::axis_box(vec![a], vec![b])
    }

    pub fn whole_space(n: usize) -> Self {
        Self::Box { lo: vec![f64::NEG_INFINITY; n], hi: vec![f64::INFINITY; n] }
    }

    pub fn ellipsoid(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        Ok(Self::Ellipsoid(Ellipsoid::new(center, shape)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Polytope(p) => p.dim,
            Self::Ball { center, .. } => center.len(),
            Self::Box { lo, .. } => lo.len(),
            Self::Ellipsoid(e) => e.center.len(),
            Self::Sum(parts) => parts[0].dim(),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, Self::Box { lo, hi } if lo.iter().all(|v| v.is_infinite()) && hi.iter().all(|v| v.is_infinite()))
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Self::Box { lo, hi } => lo.iter().chain(hi).all(|v| v.is_finite()),
            Self::Sum(parts) => parts.iter().all(Self::is_bounded),
            _ => true,
        }
    }

    /// h_K(θ) = max_{x∈K} ⟨x, θ⟩ (possibly +∞ for unbounded bodies).
    pub fn support(&self, theta: &[f64]) -> f64 {
        match self {
            Self::Polytope(p) => p.support(theta),
            Self::Ball { center, radius } => dot(center, theta) + radius * norm(theta),
            Self::Box { lo, hi } => {
                let mut s = 0.0;
                for k in 0..lo.len() {
                    let t = theta[k];
                    if t > 0.0 {
                        s += hi[k] * t;
                    } else if t < 0.0 {
                        s += lo[k] * t;
                    }
                }
                s
            }
            Self::Ellipsoid(e) => e.support(theta),
            Self::Sum(parts) => parts.iter().map(|p| p.support(theta)).sum(),
        }
    }

    /// Bounding box (componentwise extreme coordinates).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Polytope(p) => {
                let n = p.dim;
                let lo = (0..n).map(|k| p.vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..n).map(|k| p.vertices.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            }
            Self::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Self::Box { lo, hi } => (lo.clone(), hi.clone()),
            Self::Ellipsoid(e) => {
                let w = e.half_widths();
                (
                    e.center.iter().zip(&w).map(|(c, r)| c - r).collect(),
                    e.center.iter().zip(&w).map(|(c, r)| c + r).collect(),
                )
            }
            Self::Sum(parts) => {
                let n = self.dim();
                let mut lo = vec![0.0; n];
                let mut hi = vec![0.0; n];
                for p in parts {
                    let (a, b) = p.bounding_box();
                    for k in 0..n {
                        lo[k] += a[k];
                        hi[k] += b[k];
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Upper bound on max_{x∈K} |x|.
    pub fn radius_bound(&self) -> f64 {
        match self {
            Self::Polytope(p) => p.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max),
            Self::Ball { center, radius } => norm(center) + radius,
            Self::Ellipsoid(e) => norm(&e.center) + e.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt(),
            Self::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| a.abs().max(b.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
            Self::Sum(parts) => parts.iter().map(Self::radius_bound).sum(),
        }
    }

    /// A point in the interior of the body.
    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            Self::Polytope(p) => p.centroid_of_vertices(),
            Self::Ball { center, .. } => center.clone(),
            Self::Ellipsoid(e) => e.center.clone(),
            Self::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&a, &b)| match (a.is_finite(), b.is_finite()) {
                    (true, true) => 0.5 * (a + b),
                    (true, false) => a + 1.0,
                    (false, true) => b - 1.0,
                    (false, false) => 0.0,
                })
                .collect(),
            Self::Sum(parts) => {
                let mut x = vec![0.0; self.dim()];
                for p in parts {
                    for (xi, pi) in x.iter_mut().zip(p.interior_point()) {
                        *xi += pi;
                    }
                }
                x
            }
        }
    }

    /// Euclidean distance from x to the body (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Self::Polytope(p) => p.distance(x),
            Self::Ball { center, radius } => (linalg::dist(x, center) - radius).max(0.0),
            Self::Box { lo, hi } => {
                let mut s = 0.0;
                for k in 0..lo.len() {
                    let d = (lo[k] - x[k]).max(x[k] - hi[k]).max(0.0);
                    s += d * d;
                }
                s.sqrt()
            }
            Self::Ellipsoid(e) => e.distance(x),
            Self::Sum(parts) => match rounded_parts(parts) {
                Some((q, center, r)) => (q.distance(&linalg::sub(x, center)) - r).max(0.0),
                None => self.dual_distance(x),
            },
        }
    }

    /// dist(x, K) = max(0, sup_{|θ|=1} ⟨x,θ⟩ − h_K(θ)), maximized over a
    /// direction sample followed by local refinement.
    fn dual_distance(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let gap = |th: &[f64]| dot(x, th) - self.support(th);
        match n {
            1 => gap(&[1.0]).max(gap(&[-1.0])).max(0.0),
            2 => {
                let m = 720;
                let step = 2.0 * std::f64::consts::PI / m as f64;
                let f = |a: f64| -gap(&[a.cos(), a.sin()]);
                let (best, _) = (0..m)
                    .map(|k| (k as f64 * step, f(k as f64 * step)))
                    .fold((0.0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
                let (_, v) = linalg::golden_min(f, best - step, best + step);
                (-v).max(0.0)
            }
            _ => {
                let dirs = linalg::directions(3, 4000);
                let mut best = dirs[0].clone();
                let mut val = gap(&best);
                for d in &dirs[1..] {
                    let g = gap(d);
                    if g > val {
                        val = g;
                        best = d.clone();
                    }
                }
                let mut step = 0.05;
                while step > 1e-10 {
                    let mut improved = false;
                    for k in 0..3 {
                        for s in [-step, step] {
                            let mut c = best.clone();
                            c[k] += s;
                            let l = norm(&c);
                            c.iter_mut().for_each(|v| *v /= l);
                            let g = gap(&c);
                            if g > val {
                                val = g;
                                best = c;
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        step *= 0.5;
                    }
                }
                val.max(0.0)
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let scale = 1.0 + norm(x);
        match self {
            Self::Polytope(p) => p.violation(x) <= MEMBERSHIP_TOL * scale,
            Self::Ball { center, radius } => linalg::dist(x, center) <= radius + MEMBERSHIP_TOL * scale,
            Self::Box { lo, hi } => (0..lo.len())
                .all(|k| x[k] >= lo[k] - MEMBERSHIP_TOL * scale && x[k] <= hi[k] + MEMBERSHIP_TOL * scale),
            Self::Ellipsoid(e) => e.level(x) <= 1.0 + MEMBERSHIP_TOL * scale,
            Self::Sum(_) => self.distance(x) <= 1e-10 * scale,
        }
    }

    /// Minkowski gauge ‖x‖_K = inf{λ > 0 : x ∈ λK}.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        match self {
            Self::Polytope(p) => {
                if p.facets.iter().any(|f| f.offset <= 1e-12) {
                    return Err(Error::OriginNotInterior);
                }
                Ok(p.facets
                    .iter()
                    .map(|f| dot(&f.normal, x) / f.offset)
                    .fold(0.0, f64::max))
            }
            Self::Ball { center, radius } => {
                let a = radius * radius - dot(center, center);
                if a <= 1e-12 * radius * radius {
                    return Err(Error::OriginNotInterior);
                }
                let b = dot(x, center);
                Ok(((b * b + a * dot(x, x)).sqrt() - b) / a)
            }
            Self::Box { lo, hi } => {
                if lo.iter().zip(hi).any(|(a, b)| *a >= 0.0 || *b <= 0.0) {
                    return Err(Error::OriginNotInterior);
                }
                Ok((0..lo.len())
                    .map(|k| if x[k] > 0.0 { x[k] / hi[k] } else { x[k] / lo[k] })
                    .fold(0.0, f64::max))
            }
            Self::Ellipsoid(e) => e.gauge(x),
            Self::Sum(_) => {
                let dirs = linalg::directions(self.dim(), 720);
                if dirs.iter().any(|d| self.support(d) <= 1e-12) {
                    return Err(Error::OriginNotInterior);
                }
                if norm(x) == 0.0 {
                    return Ok(0.0);
                }
                // x/λ on the boundary: bisection on membership
                let mut lo = 0.0;
                let mut hi = 1.0;
                while self.contains(&linalg::scale(x, 1.0 / hi)) {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if mid > 0.0 && self.contains(&linalg::scale(x, 1.0 / mid)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// True when the origin is an interior point.
    pub fn origin_interior(&self) -> bool {
        self.gauge(&vec![0.0; self.dim()]).is_ok()
    }

    pub fn scale(&self, t: f64) -> Self {
        match self {
            Self::Polytope(p) => Self::Polytope(p.scale(t)),
            Self::Ball { center, radius } => Self::Ball { center: linalg::scale(center, t), radius: radius * t },
            Self::Box { lo, hi } => Self::Box {
                lo: lo.iter().map(|v| v * t).collect(),
                hi: hi.iter().map(|v| v * t).collect(),
            },
            Self::Ellipsoid(e) => Self::Ellipsoid(e.scale(t)),
            Self::Sum(parts) => Self::Sum(parts.iter().map(|p| p.scale(t)).collect()),
        }
    }

    pub fn translate(&self, a: &[f64]) -> Self {
        match self {
            Self::Polytope(p) => Self::Polytope(p.translate(a)),
            Self::Ball { center, radius } => Self::Ball { center: linalg::add(center, a), radius: *radius },
            Self::Box { lo, hi } => Self::Box { lo: linalg::add(lo, a), hi: linalg::add(hi, a) },
            Self::Ellipsoid(e) => Self::Ellipsoid(e.translate(a)),
            Self::Sum(parts) => {
                let mut parts = parts.clone();
                parts[0] = parts[0].translate(a);
                Self::Sum(parts)
            }
        }
    }

    /// Bounded box as a polytope.
    pub fn as_polytope(&self) -> Option<Polytope> {
        match self {
            Self::Polytope(p) => Some(p.clone()),
            Self::Box { lo, hi } if self.is_bounded() => {
                let n = lo.len();
                let verts: Vec<Vec<f64>> = (0..(1usize << n))
                    .map(|m| (0..n).map(|k| if m >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
                    .collect();
                Polytope::hull(&verts).ok()
            }
            _ => None,
        }
    }

    /// Range of coordinate k over the slice where the first k coordinates are
    /// fixed to `prefix`. May over-approximate for general Minkowski sums.
    pub fn section(&self, prefix: &[f64], k: usize) -> Option<(f64, f64)> {
        match self {
            Self::Polytope(p) => p.section(prefix, k),
            Self::Ball { center, radius } => {
                let used: f64 = (0..k).map(|i| (prefix[i] - center[i]).powi(2)).sum();
                let rem = radius * radius - used;
                if rem < 0.0 {
                    return None;
                }
                let r = rem.sqrt();
                Some((center[k] - r, center[k] + r))
            }
            Self::Box { lo, hi } => Some((lo[k], hi[k])),
            Self::Ellipsoid(e) => e.section(prefix, k),
            Self::Sum(parts) => {
                if self.dim() == 2 && k == 1 {
                    if let Some((q, c, r)) = rounded_parts(parts) {
                        return rounded_section(q, c, r, prefix[0]);
                    }
                }
                let (lo, hi) = self.bounding_box();
                Some((lo[k], hi[k]))
            }
        }
    }

    /// Lebesgue volume.
    pub fn volume(&self) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::Unbounded);
        }
        match self {
            Self::Polytope(p) => Ok(p.volume()),
            Self::Ball { radius, center } => Ok(ball_volume(center.len()) * radius.powi(center.len() as i32)),
            Self::Box { lo, hi } => Ok(lo.iter().zip(hi).map(|(a, b)| b - a).product()),
            Self::Ellipsoid(e) => Ok(e.volume()),
            Self::Sum(parts) => sum_volume(parts),
        }
    }

    /// Minkowski sum K + L.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        if self.is_whole_space() || other.is_whole_space() {
            return Ok(Self::whole_space(self.dim()));
        }
        let mut flat = Vec::new();
        for b in [self, other] {
            match b {
                Self::Sum(parts) => flat.extend(parts.iter().cloned()),
                _ => flat.push(b.clone()),
            }
        }
        normalize_sum(flat)
    }
}

/// For a sum of one polytope-or-box and one ball, returns (that part, ball
/// center, radius).
fn rounded_parts(parts: &[ConvexBody]) -> Option<(&ConvexBody, &[f64], f64)> {
    if parts.len() != 2 {
        return None;
    }
    let (q, b) = match (&parts[0], &parts[1]) {
        (q @ (ConvexBody::Polytope(_) | ConvexBody::Box { .. }), b @ ConvexBody::Ball { .. }) => (q, b),
        (b @ ConvexBody::Ball { .. }, q @ (ConvexBody::Polytope(_) | ConvexBody::Box { .. })) => (q, b),
        _ => return None,
    };
    match b {
        ConvexBody::Ball { center, radius } => Some((q, center.as_slice(), *radius)),
        _ => None,
    }
}

/// Vertical section of Q + B(c, r) in the plane at x₀ = a.
fn rounded_section(q: &ConvexBody, c: &[f64], r: f64, a: f64) -> Option<(f64, f64)> {
    let (qlo, qhi) = q.bounding_box();
    let y_lo = (a - c[0] - r).max(qlo[0]);
    let y_hi = (a - c[0] + r).min(qhi[0]);
    if y_lo > y_hi {
        return None;
    }
    let cap = |y: f64| (r * r - (a - c[0] - y).powi(2)).max(0.0).sqrt();
    let upper = |y: f64| match q.section(&[y], 1) {
        Some((_, h)) => -(h + cap(y)),
        None => f64::INFINITY,
    };
    let lower = |y: f64| match q.section(&[y], 1) {
        Some((l, _)) => l - cap(y),
        None => f64::INFINITY,
    };
    let (_, u) = linalg::golden_min(upper, y_lo, y_hi);
    let (_, l) = linalg::golden_min(lower, y_lo, y_hi);
    Some((l + c[1], -u + c[1]))
}

fn normalize_sum(parts: Vec<ConvexBody>) -> Result<ConvexBody> {
    let n = parts[0].dim();
    let mut boxes: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut poly: Option<Polytope> = None;
    let mut ball: Option<(Vec<f64>, f64)> = None;
    let mut ellipsoids: Vec<ConvexBody> = Vec::new();
    for p in parts {
        match p {
            ConvexBody::Box { lo, hi } => {
                boxes = Some(match boxes {
                    None => (lo, hi),
                    Some((a, b)) => (linalg::add(&a, &lo), linalg::add(&b, &hi)),
                })
            }
            ConvexBody::Polytope(q) => {
                poly = Some(match poly {
                    None => q,
                    Some(p0) => polytope_sum(&p0, &q)?,
                })
            }
            ConvexBody::Ball { center, radius } => {
                ball = Some(match ball {
                    None => (center, radius),
                    Some((c, r)) => (linalg::add(&c, &center), r + radius),
                })
            }
            e @ ConvexBody::Ellipsoid(_) => ellipsoids.push(e),
            ConvexBody::Sum(_) => return Err(Error::Internal("nested sum".into())),
        }
    }
    // in 1D every body is an interval
    if n == 1 {
        let mut lo = 0.0;
        let mut hi = 0.0;
        if let Some((a, b)) = &boxes {
            lo += a[0];
            hi += b[0];
        }
        if let Some(p) = &poly {
            lo += p.vertices[0][0];
            hi += p.vertices[1][0];
        }
        if let Some((c, r)) = &ball {
            lo += c[0] - r;
            hi += c[0] + r;
        }
        for e in &ellipsoids {
            let (a, b) = e.bounding_box();
            lo += a[0];
            hi += b[0];
        }
        return Ok(ConvexBody::Box { lo: vec![lo], hi: vec![hi] });
    }
    if let Some((lo, hi)) = boxes.take() {
        let b = ConvexBody::Box { lo, hi };
        if b.is_bounded() && poly.is_some() {
            let bp = b.as_polytope().ok_or(Error::DegeneratePolytope)?;
            poly = Some(polytope_sum(poly.as_ref().unwrap(), &bp)?);
        } else {
            boxes = match b {
                ConvexBody::Box { lo, hi } => Some((lo, hi)),
                _ => None,
            };
        }
    }
    let mut out = Vec::new();
    if let Some((lo, hi)) = boxes {
        out.push(ConvexBody::Box { lo, hi });
    }
    if let Some(p) = poly {
        out.push(ConvexBody::Polytope(p));
    }
    if let Some((center, radius)) = ball {
        out.push(ConvexBody::Ball { center, radius });
    }
    out.extend(ellipsoids);
    if out.len() == 1 {
        return Ok(out.pop().unwrap());
    }
    Ok(ConvexBody::Sum(out))
}

fn polytope_sum(a: &Polytope, b: &Polytope) -> Result<Polytope> {
    let mut pts = Vec::with_capacity(a.vertices.len() * b.vertices.len());
    for u in &a.vertices {
        for v in &b.vertices {
            pts.push(linalg::add(u, v));
        }
    }
    Polytope::hull(&pts)
}

fn sum_volume(parts: &[ConvexBody]) -> Result<f64> {
    let n = parts[0].dim();
    let mut poly: Option<Polytope> = None;
    let mut radius = 0.0;
    let mut others = false;
    for p in parts {
        match p {
            ConvexBody::Polytope(q) => poly = Some(q.clone()),
            b @ ConvexBody::Box { .. } => poly = b.as_polytope(),
            ConvexBody::Ball { radius: r, .. } => radius += r,
            _ => others = true,
        }
    }
    if !others {
        let r = radius;
        return Ok(match (n, poly) {
            (2, Some(p)) => p.volume() + r * p.surface_area() + std::f64::consts::PI * r * r,
            (3, Some(p)) => {
                p.volume()
                    + r * p.surface_area()
                    + r * r * p.mean_width_term()
                    + 4.0 / 3.0 * std::f64::consts::PI * r.powi(3)
            }
            (_, None) => ball_volume(n) * r.powi(n as i32),
            _ => return Err(Error::UnsupportedDimension(n)),
        });
    }
    if n != 2 {
        return Err(Error::Unsupported("volume of a 3D sum with an ellipsoid summand".into()));
    }
    // circumscribed support polygons with Richardson extrapolation
    let body = ConvexBody::Sum(parts.to_vec());
    let a1 = support_polygon_area(&body, 2048);
    let a2 = support_polygon_area(&body, 4096);
    let est = (4.0 * a2 - a1) / 3.0;
    if ((a2 - a1) / 3.0).abs() > 1e-6 * est.abs() {
        return Err(Error::Quadrature("support-polygon volume did not reach 1e-6".into()));
    }
    Ok(est)
}

fn support_polygon_area(body: &ConvexBody, m: usize) -> f64 {
    let step = 2.0 * std::f64::consts::PI / m as f64;
    let dirs: Vec<[f64; 2]> = (0..m).map(|k| [(k as f64 * step).cos(), (k as f64 * step).sin()]).collect();
    let h: Vec<f64> = dirs.iter().map(|d| body.support(d)).collect();
    let verts: Vec<[f64; 2]> = (0..m)
        .map(|i| {
            let j = (i + 1) % m;
            let (a, b) = (dirs[i], dirs[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            [(h[i] * b[1] - h[j] * a[1]) / det, (a[0] * h[j] - b[0] * h[i]) / det]
        })
        .collect();
    let mut s = 0.0;
    for i in 0..m {
        let (p, q) = (verts[i], verts[(i + 1) % m]);
        s += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * s
}

/// Surface area measure of a polytope: one atom per facet at its outward
/// unit normal with the facet's (n−1)-measure as weight.
pub fn surface_area_measure(k: &ConvexBody) -> Result<DiscreteMeasure> {
    let p = k.as_polytope().ok_or_else(|| {
        if k.is_bounded() {
            Error::Unsupported("surface area measure needs a polytope".into())
        } else {
            Error::Unbounded
        }
    })?;
    let mut m = DiscreteMeasure::sphere(p.dim, Provenance::SurfaceArea);
    for f in &p.facets {
        m.push(&f.normal, p.facet_area(f));
    }
    Ok(m)
}

/// Relative quermassintegrals from |K + tL| at t = 0, …, n by exact
/// polynomial interpolation.
pub fn quermassintegrals(k: &ConvexBody, l: &ConvexBody) -> Result<QuermassVector> {
    check_dim(k.dim(), l.dim())?;
    let n = k.dim();
    let vol_at = |t: f64| -> Result<f64> {
        if t == 0.0 {
            k.volume()
        } else {
            k.minkowski_sum(&l.scale(t))?.volume()
        }
    };
    let node_volumes: Vec<f64> = (0..=n).map(|j| vol_at(j as f64)).collect::<Result<_>>()?;
    let v = DMatrix::from_fn(n + 1, n + 1, |i, j| (i as f64).powi(j as i32));
    let rhs = DVector::from_column_slice(&node_volumes);
    let a = v
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("singular Vandermonde system".into()))?;
    let fitted = &v * &a;
    let fit_residual = (0..=n)
        .map(|i| (fitted[i] - node_volumes[i]).abs() / node_volumes[i].abs().max(1.0))
        .fold(0.0, f64::max);
    let coefficients: Vec<f64> = (0..=n).map(|j| a[j] / binomial(n, j)).collect();
    let q = QuermassVector { coefficients, node_volumes, fit_residual, held_out_residual: 0.0 };
    let v_half = vol_at(0.5)?;
    let held_out_residual = (q.steiner(0.5) - v_half).abs() / v_half.abs().max(f64::MIN_POSITIVE);
    let q = QuermassVector { held_out_residual, ..q };
    if q.fit_residual > 1e-8 || q.held_out_residual > 1e-8 {
        return Err(Error::FitResidual(q.fit_residual.max(q.held_out_residual)));
    }
    Ok(q)
}

/// Per_L(F) = ∫ h_L dS_F = n W_1(F, L).
pub fn anisotropic_perimeter(f: &ConvexBody, l: &ConvexBody) -> Result<f64> {
    check_dim(f.dim(), l.dim())?;
    if let Some(p) = f.as_polytope() {
        let mut s = linalg::KahanSum::new();
        for fac in &p.facets {
            s.add(p.facet_area(fac) * l.support(&fac.normal));
        }
        return Ok(s.value());
    }
    if !f.is_bounded() {
        return Err(Error::Unbounded);
    }
    let q = quermassintegrals(f, l)?;
    Ok(f.dim() as f64 * q.coefficients[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square() -> ConvexBody {
        ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn supports_of_catalog_bodies() {
        let disk = ConvexBody::unit_ball(2);
        assert!((disk.support(&[3.0, 4.0]) - 5.0).abs() < 1e-15);
        let iv = ConvexBody::interval(-1.0, 2.0).unwrap();
        assert_eq!(iv.support(&[1.0]), 2.0);
        assert_eq!(iv.support(&[-1.0]), 1.0);
        assert_eq!(square().support(&[1.0, 1.0]), 2.0);
        let e = ConvexBody::ellipsoid(vec![0.0, 0.0], DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]))).unwrap();
        assert!((e.support(&[1.0, 0.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gauges() {
        let iv = ConvexBody::interval(-1.0, 2.0).unwrap();
        assert_eq!(iv.gauge(&[4.0]).unwrap(), 2.0);
        assert_eq!(iv.gauge(&[-4.0]).unwrap(), 4.0);
        let disk = ConvexBody::unit_ball(2);
        assert!((disk.gauge(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-14);
        let off = ConvexBody::interval(0.5, 2.0).unwrap();
        assert_eq!(off.gauge(&[1.0]), Err(Error::OriginNotInterior));
        let shifted = ConvexBody::ball(vec![0.5, 0.0], 1.0).unwrap();
        // boundary point (1.5, 0) has gauge 1
        assert!((shifted.gauge(&[1.5, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!((shifted.gauge(&[-0.5, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn volumes_and_steiner() {
        assert!((square().volume().unwrap() - 4.0).abs() < 1e-15);
        assert!((ConvexBody::unit_ball(2).volume().unwrap() - PI).abs() < 1e-15);
        let s = square().minkowski_sum(&ConvexBody::unit_ball(2)).unwrap();
        assert!((s.volume().unwrap() - (12.0 + PI)).abs() < 1e-12);
        let iv = ConvexBody::interval(0.0, 1.0).unwrap();
        let iv2 = iv.minkowski_sum(&iv).unwrap();
        assert_eq!(iv2, ConvexBody::interval(0.0, 2.0).unwrap());
    }

    #[test]
    fn quermass_square_disk() {
        let q = quermassintegrals(&square(), &ConvexBody::unit_ball(2)).unwrap();
        assert!((q.coefficients[0] - 4.0).abs() < 1e-12);
        assert!((q.coefficients[1] - 4.0).abs() < 1e-12);
        assert!((q.coefficients[2] - PI).abs() < 1e-12);
        assert!(q.held_out_residual < 1e-12);
    }

    #[test]
    fn perimeter_interval_asymmetric() {
        let f = ConvexBody::interval(0.0, 1.0).unwrap();
        let l = ConvexBody::interval(-1.0, 2.0).unwrap();
        assert_eq!(anisotropic_perimeter(&f, &l).unwrap(), 3.0);
        let q = quermassintegrals(&f, &l).unwrap();
        assert!((q.coefficients[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rounded_square_sections() {
        let s = square().minkowski_sum(&ConvexBody::unit_ball(2)).unwrap();
        let (lo, hi) = s.section(&[1.5], 1).unwrap();
        let expect = 1.0 + (1.0f64 - 0.25).sqrt();
        assert!((hi - expect).abs() < 1e-7 && (lo + expect).abs() < 1e-7);
        assert!(s.contains(&[1.7, 1.7]));
        assert!(!s.contains(&[1.8, 1.8]));
    }

    #[test]
    fn ellipsoid_sections_and_distance() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let e = ConvexBody::ellipsoid(vec![0.3, -0.2], a).unwrap();
        // section endpoints lie on the boundary
        let (lo, hi) = e.section(&[0.5], 1).unwrap();
        if let ConvexBody::Ellipsoid(el) = &e {
            assert!((el.level(&[0.5, lo]) - 1.0).abs() < 1e-12);
            assert!((el.level(&[0.5, hi]) - 1.0).abs() < 1e-12);
        }
        let d = e.distance(&[5.0, 5.0]);
        let dd = e.dual_distance(&[5.0, 5.0]);
        assert!((d - dd).abs() < 1e-8);
    }
}

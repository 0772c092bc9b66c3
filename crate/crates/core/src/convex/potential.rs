//! Convex potentials φ: ℝⁿ → (−∞, +∞] with closed-form catalog entries and a
//! lattice fallback.

use nalgebra::DMatrix;

use super::grid::GridPotential;
use super::supconv::InfConv;
use crate::bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm, MAX_DIM};

#[derive(Debug, Clone)]
pub enum Potential {
    /// ½ xᵀAx + ⟨b,x⟩ + c with A ⪰ 0.
    Quadratic { a: DMatrix<f64>, b: Vec<f64>, c: f64 },
    /// α|x|^p, p ≥ 1.
    PowerNorm { dim: usize, alpha: f64, p: f64 },
    /// ⟨b,x⟩ + c.
    Linear { b: Vec<f64>, c: f64 },
    Grid(GridPotential),
    /// base + Ind_body.
    WithIndicator { base: Box<Potential>, body: ConvexBody },
    /// base(x − shift) + ⟨slope, x⟩ + offset.
    Affine { base: Box<Potential>, shift: Vec<f64>, slope: Vec<f64>, offset: f64 },
    /// scale·(1/(1 − |x|²/radius²) − 1) inside the open ball, +∞ outside;
    /// e^{−φ} vanishes continuously at the boundary sphere.
    Barrier { dim: usize, radius: f64, scale: f64 },
    /// Support function h_K.
    Support { body: ConvexBody },
    /// Infimal convolution produced by sup-convolution of functions.
    InfConv(Box<InfConv>),
    /// Legendre transform of `of` evaluated by one-dimensional maximization
    /// (1D potentials, or radial potentials via their radial profile).
    NumericConjugate { of: Box<Potential> },
}

/// Radial profile ρ with φ(x) = ρ(|x − center|), ρ nondecreasing on [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Profile {
    Quadratic { a: f64, c0: f64 },
    Power { alpha: f64, p: f64, c0: f64 },
    Barrier { radius: f64, scale: f64, c0: f64 },
    Constant { c0: f64 },
}

impl Profile {
    pub(crate) fn eval(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { a, c0 } => 0.5 * a * r * r + c0,
            Self::Power { alpha, p, c0 } => alpha * r.powf(p) + c0,
            Self::Barrier { radius, scale, c0 } => {
                let u = (r / radius).powi(2);
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    scale * (1.0 / (1.0 - u) - 1.0) + c0
                }
            }
            Self::Constant { c0 } => c0,
        }
    }

    /// Radius r with ρ(r) = level; `None` when level < ρ(0), ∞ for a
    /// constant profile.
    pub(crate) fn inverse(&self, level: f64) -> Option<f64> {
        let d = level - self.eval(0.0);
        if d < 0.0 {
            return None;
        }
        Some(match *self {
            Self::Quadratic { a, .. } => (2.0 * d / a).sqrt(),
            Self::Power { alpha, p, .. } => (d / alpha).powf(1.0 / p),
            Self::Barrier { radius, scale, .. } => radius * (1.0 - 1.0 / (1.0 + d / scale)).sqrt(),
            Self::Constant { .. } => f64::INFINITY,
        })
    }

    /// Largest radius with finite profile.
    pub(crate) fn reach(&self) -> f64 {
        match *self {
            Self::Barrier { radius, .. } => radius,
            _ => f64::INFINITY,
        }
    }

    fn shifted(self, c: f64) -> Self {
        match self {
            Self::Quadratic { a, c0 } => Self::Quadratic { a, c0: c0 + c },
            Self::Power { alpha, p, c0 } => Self::Power { alpha, p, c0: c0 + c },
            Self::Barrier { radius, scale, c0 } => Self::Barrier { radius, scale, c0: c0 + c },
            Self::Constant { c0 } => Self::Constant { c0: c0 + c },
        }
    }
}

/// Gradient (or flagged subgradient) of a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub value: Vec<f64>,
    /// True when the point was detected as a nondifferentiability point; the
    /// value is then a deterministic subgradient candidate.
    pub kink: bool,
}

fn interior(body: &ConvexBody, x: &[f64]) -> bool {
    match body {
        ConvexBody::Box { lo, hi } => (0..lo.len()).all(|k| x[k] > lo[k] && x[k] < hi[k]),
        ConvexBody::Ball { center, radius } => linalg::dist(x, center) < *radius,
        ConvexBody::Polytope(p) => p.violation(x) < 0.0,
        _ => body.contains(x) && {
            // probe a small neighbourhood
            let eps = 1e-9 * (1.0 + norm(x));
            (0..x.len()).all(|k| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[k] += eps;
                b[k] -= eps;
                body.contains(&a) && body.contains(&b)
            })
        },
    }
}

impl Potential {
    pub fn quadratic(a: DMatrix<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
        }
        if !linalg::is_psd(&a) {
            return Err(Error::InvalidArgument("quadratic potential needs a symmetric PSD matrix".into()));
        }
        Ok(Self::Quadratic { a, b, c })
    }

    /// ½|x|² in dimension n.
    pub fn half_square(n: usize) -> Self {
        Self::Quadratic { a: DMatrix::identity(n, n), b: vec![0.0; n], c: 0.0 }
    }

    pub fn power_norm(dim: usize, alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument("power norm needs α > 0 and p ≥ 1".into()));
        }
        Ok(Self::PowerNorm { dim, alpha, p })
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::Linear { b: vec![0.0; dim], c }
    }

    pub fn barrier(dim: usize, radius: f64, scale: f64) -> Result<Self> {
        if !(radius > 0.0 && scale > 0.0) {
            return Err(Error::InvalidArgument("barrier needs positive radius and scale".into()));
        }
        Ok(Self::Barrier { dim, radius, scale })
    }

    /// base + Ind_body, collapsing nested indicators of identical bodies.
    pub fn with_indicator(base: Potential, body: ConvexBody) -> Result<Self> {
        check_dim(base.dim(), body.dim())?;
        if body.is_whole_space() {
            return Ok(base);
        }
        if let Self::WithIndicator { base: inner, body: outer } = base {
            let merged = intersect(&outer, &body)?;
            return Ok(Self::WithIndicator { base: inner, body: merged });
        }
        Ok(Self::WithIndicator { base: Box::new(base), body })
    }

    /// x ↦ base(x − shift) + ⟨slope, x⟩ + offset, folding nested affine layers.
    pub fn affine(base: Potential, shift: Vec<f64>, slope: Vec<f64>, offset: f64) -> Self {
        if shift.iter().all(|v| *v == 0.0) && slope.iter().all(|v| *v == 0.0) && offset == 0.0 {
            return base;
        }
        match base {
            // b(x − s − s2) + ⟨v, x − s2⟩ + o + ⟨v2,x⟩ + o2
            Self::Affine { base: inner, shift: s, slope: v, offset: o } => {
                let new_shift = linalg::add(&s, &shift);
                let new_slope = linalg::add(&v, &slope);
                let new_offset = o + offset - dot(&v, &shift);
                Self::affine(*inner, new_shift, new_slope, new_offset)
            }
            Self::Linear { b, c } => {
                // ⟨b, x − s⟩ + c + ⟨v,x⟩ + o
                Self::Linear { b: linalg::add(&b, &slope), c: c - dot(&b, &shift) + offset }
            }
            other => Self::Affine { base: Box::new(other), shift, slope, offset },
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { b, .. } => b.len(),
            Self::PowerNorm { dim, .. } | Self::Barrier { dim, .. } => *dim,
            Self::Linear { b, .. } => b.len(),
            Self::Grid(g) => g.dim(),
            Self::WithIndicator { base, .. } => base.dim(),
            Self::Affine { shift, .. } => shift.len(),
            Self::Support { body } => body.dim(),
            Self::InfConv(ic) => ic.dim(),
            Self::NumericConjugate { of } => of.dim(),
        }
    }

    /// φ(x), with +∞ outside the effective domain.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic { a, b, c } => 0.5 * linalg::quad_form(a, x) + dot(b, x) + c,
            Self::PowerNorm { alpha, p, .. } => {
                let r = norm(x);
                if *p == 1.0 {
                    alpha * r
                } else if *p == 2.0 {
                    alpha * r * r
                } else {
                    alpha * r.powf(*p)
                }
            }
            Self::Linear { b, c } => dot(b, x) + c,
            Self::Grid(g) => g.eval(x),
            Self::WithIndicator { base, body } => {
                if body.contains(x) {
                    base.value(x)
                } else {
                    f64::INFINITY
                }
            }
            Self::Affine { base, shift, slope, offset } => {
                let z = linalg::sub_buf(x, shift);
                let v = base.value(&z[..x.len()]);
                if v.is_infinite() {
                    v
                } else {
                    v + dot(slope, x) + offset
                }
            }
            Self::Barrier { radius, scale, .. } => {
                Profile::Barrier { radius: *radius, scale: *scale, c0: 0.0 }.eval(norm(x))
            }
            Self::Support { body } => body.support(x),
            Self::InfConv(ic) => ic.value(x),
            Self::NumericConjugate { of } => numeric_conjugate(of, x).0,
        }
    }

    /// Gradient at an interior point of the effective domain.
    pub fn gradient(&self, x: &[f64]) -> Result<Gradient> {
        check_dim(self.dim(), x.len())?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite point".into()));
        }
        let smooth = |value: Vec<f64>| Ok(Gradient { value, kink: false });
        match self {
            Self::Quadratic { a, b, .. } => smooth(linalg::add(&linalg::mat_vec(a, x), b)),
            Self::PowerNorm { alpha, p, dim } => {
                let r = norm(x);
                if r == 0.0 {
                    if *p > 1.0 {
                        return smooth(vec![0.0; *dim]);
                    }
                    // one-sided limits ±α e_k all have norm α; take the first
                    let mut v = vec![0.0; *dim];
                    v[0] = -alpha;
                    return Ok(Gradient { value: v, kink: true });
                }
                let s = alpha * p * r.powf(p - 2.0);
                smooth(linalg::scale(x, s))
            }
            Self::Linear { b, .. } => smooth(b.clone()),
            Self::Grid(g) => {
                let (value, kink) = g.gradient(x)?;
                Ok(Gradient { value, kink })
            }
            Self::WithIndicator { base, body } => {
                if !interior(body, x) {
                    return Err(Error::OutsideDomain);
                }
                base.gradient(x)
            }
            Self::Affine { base, shift, slope, .. } => {
                let z = linalg::sub(x, shift);
                let g = base.gradient(&z)?;
                Ok(Gradient { value: linalg::add(&g.value, slope), kink: g.kink })
            }
            Self::Barrier { radius, scale, .. } => {
                let u = dot(x, x) / (radius * radius);
                if u >= 1.0 {
                    return Err(Error::OutsideDomain);
                }
                let s = scale * 2.0 / (radius * radius) / ((1.0 - u) * (1.0 - u));
                smooth(linalg::scale(x, s))
            }
            Self::Support { body } => support_gradient(body, x),
            Self::InfConv(_) | Self::NumericConjugate { .. } => self.numeric_gradient(x),
        }
    }

    /// Central differences with a kink flag from disagreeing one-sided slopes.
    fn numeric_gradient(&self, x: &[f64]) -> Result<Gradient> {
        let n = x.len();
        let v0 = self.value(x);
        if !v0.is_finite() {
            return Err(Error::OutsideDomain);
        }
        let h = 1e-6 * (1.0 + norm(x));
        let mut g = vec![0.0; n];
        let mut kink = false;
        for k in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let (vp, vm) = (self.value(&xp), self.value(&xm));
            if !vp.is_finite() || !vm.is_finite() {
                return Err(Error::OutsideDomain);
            }
            let dp = (vp - v0) / h;
            let dm = (v0 - vm) / h;
            g[k] = 0.5 * (dp + dm);
            if (dp - dm).abs() > 1e-3 * (1.0 + dp.abs().max(dm.abs())) {
                kink = true;
                g[k] = if dp.abs() <= dm.abs() { dp } else { dm };
            }
        }
        Ok(Gradient { value: g, kink })
    }

    /// t·φ(x/t) for t > 0.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation factor must be positive, got {t}")));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            Self::Quadratic { a, b, c } => Self::Quadratic { a: a / t, b: b.clone(), c: c * t },
            Self::PowerNorm { dim, alpha, p } => Self::PowerNorm { dim: *dim, alpha: alpha * t.powf(1.0 - p), p: *p },
            Self::Linear { b, c } => Self::Linear { b: b.clone(), c: c * t },
            Self::Grid(g) => Self::Grid(g.dilate(t)),
            Self::WithIndicator { base, body } => {
                Self::WithIndicator { base: Box::new(base.dilate(t)?), body: body.scale(t) }
            }
            Self::Affine { base, shift, slope, offset } => Self::Affine {
                base: Box::new(base.dilate(t)?),
                shift: linalg::scale(shift, t),
                slope: slope.clone(),
                offset: offset * t,
            },
            Self::Barrier { dim, radius, scale } => Self::Barrier { dim: *dim, radius: radius * t, scale: scale * t },
            Self::Support { body } => Self::Support { body: body.clone() },
            Self::InfConv(ic) => Self::InfConv(Box::new(ic.dilate(t)?)),
            // (tφ(·/t))* = tφ*
            Self::NumericConjugate { of } => Self::NumericConjugate { of: Box::new(scale_potential(of, t)?) },
        })
    }

    /// Closure of the effective domain {φ < ∞}.
    pub fn domain(&self) -> Result<ConvexBody> {
        let n = self.dim();
        match self {
            Self::Quadratic { .. } | Self::PowerNorm { .. } | Self::Linear { .. } => Ok(ConvexBody::whole_space(n)),
            Self::Grid(g) => g.finite_region(),
            Self::WithIndicator { base, body } => intersect(&base.domain()?, body),
            Self::Affine { base, shift, .. } => Ok(base.domain()?.translate(shift)),
            Self::Barrier { radius, .. } => ConvexBody::ball(vec![0.0; n], *radius),
            Self::Support { body } => {
                if body.is_bounded() {
                    Ok(ConvexBody::whole_space(n))
                } else {
                    Err(Error::Unsupported("support function of an unbounded body".into()))
                }
            }
            Self::InfConv(ic) => Ok(ic.domain().clone()),
            Self::NumericConjugate { .. } => Ok(ConvexBody::whole_space(n)),
        }
    }

    /// Some(c) when φ ≡ c on its domain.
    pub fn flat_value(&self) -> Option<f64> {
        match self {
            Self::Linear { b, c } if b.iter().all(|v| *v == 0.0) => Some(*c),
            Self::Quadratic { a, b, c } if a.iter().all(|v| *v == 0.0) && b.iter().all(|v| *v == 0.0) => Some(*c),
            Self::WithIndicator { base, .. } => base.flat_value(),
            Self::Affine { base, slope, offset, .. } if slope.iter().all(|v| *v == 0.0) => {
                base.flat_value().map(|v| v + offset)
            }
            Self::Grid(g) => {
                let finite: Vec<f64> = g.values.iter().copied().filter(|v| v.is_finite()).collect();
                let first = finite[0];
                finite.iter().all(|v| *v == first).then_some(first)
            }
            Self::InfConv(ic) => ic.flat_value(),
            _ => None,
        }
    }

    /// Coordinates along axis k of known kinks of the potential.
    pub(crate) fn breakpoints(&self, k: usize) -> Vec<f64> {
        match self {
            Self::PowerNorm { p, .. } if *p < 2.0 => vec![0.0],
            Self::WithIndicator { base, .. } => base.breakpoints(k),
            Self::Affine { base, shift, .. } => base.breakpoints(k).into_iter().map(|v| v + shift[k]).collect(),
            Self::Support { body } => vec![body.interior_point()[k]],
            Self::InfConv(ic) => ic.breakpoints(k),
            _ => Vec::new(),
        }
    }

    /// Closed-form infimum when available.
    pub fn infimum(&self) -> Option<f64> {
        match self {
            Self::Quadratic { a, b, c } => {
                let inv = a.clone().try_inverse()?;
                Some(c - 0.5 * linalg::quad_form(&inv, b))
            }
            Self::PowerNorm { .. } | Self::Barrier { .. } => Some(0.0),
            Self::Linear { b, c } => b.iter().all(|v| *v == 0.0).then_some(*c),
            Self::Grid(g) => Some(g.min_value()),
            Self::WithIndicator { base, body } => {
                if let Some(c) = base.flat_value() {
                    return Some(c);
                }
                match &**base {
                    Self::Linear { b, c } => {
                        let m = -body.support(&linalg::scale(b, -1.0));
                        m.is_finite().then_some(m + c)
                    }
                    other => {
                        let (center, prof) = other.radial()?;
                        Some(prof.eval(body.distance(&center)))
                    }
                }
            }
            Self::Affine { base, slope, offset, .. } if slope.iter().all(|v| *v == 0.0) => {
                base.infimum().map(|v| v + offset)
            }
            Self::InfConv(ic) => ic.infimum(),
            _ => None,
        }
    }

    /// A point of the domain close to the minimizer, used to anchor envelopes
    /// and quadrature breakpoints.
    pub fn center_hint(&self) -> Vec<f64> {
        let n = self.dim();
        match self {
            Self::Quadratic { a, b, .. } => match a.clone().try_inverse() {
                Some(inv) => linalg::scale(&linalg::mat_vec(&inv, b), -1.0),
                None => vec![0.0; n],
            },
            Self::WithIndicator { base, body } => {
                let c = base.center_hint();
                if body.contains(&c) {
                    c
                } else {
                    body.interior_point()
                }
            }
            Self::Affine { base, shift, slope, .. } if slope.iter().all(|v| *v == 0.0) => {
                linalg::add(&base.center_hint(), shift)
            }
            Self::Affine { base, shift, .. } => linalg::add(&base.center_hint(), shift),
            Self::InfConv(ic) => ic.center_hint(),
            Self::Grid(g) => {
                let i = (0..g.values.len())
                    .min_by(|&a, &b| g.values[a].total_cmp(&g.values[b]))
                    .unwrap_or(0);
                g.lattice.node(i)
            }
            _ => vec![0.0; n],
        }
    }

    /// (center, profile) when φ is a nondecreasing function of |x − center|
    /// on all of ℝⁿ (or on a ball around the center, for barriers).
    pub(crate) fn radial(&self) -> Option<(Vec<f64>, Profile)> {
        let n = self.dim();
        match self {
            Self::Quadratic { a, b, c } => {
                let s = a[(0, 0)];
                let iso = s > 0.0
                    && (0..n).all(|i| (0..n).all(|j| a[(i, j)] == if i == j { s } else { 0.0 }));
                if !iso {
                    return None;
                }
                let m = linalg::scale(b, -1.0 / s);
                Some((m.clone(), Profile::Quadratic { a: s, c0: c - 0.5 * s * dot(&m, &m) }))
            }
            Self::PowerNorm { alpha, p, .. } => Some((vec![0.0; n], Profile::Power { alpha: *alpha, p: *p, c0: 0.0 })),
            Self::Barrier { radius, scale, .. } => {
                Some((vec![0.0; n], Profile::Barrier { radius: *radius, scale: *scale, c0: 0.0 }))
            }
            Self::Linear { b, c } if b.iter().all(|v| *v == 0.0) => Some((vec![0.0; n], Profile::Constant { c0: *c })),
            Self::Affine { base, shift, slope, offset } if slope.iter().all(|v| *v == 0.0) => {
                let (c, p) = base.radial()?;
                Some((linalg::add(&c, shift), p.shifted(*offset)))
            }
            _ => None,
        }
    }

    /// Minimizer of a 1D potential over ℝ (±∞ when it runs off), if known.
    pub(crate) fn argmin_1d(&self) -> Option<f64> {
        match self {
            Self::Quadratic { a, b, .. } => {
                let a = a[(0, 0)];
                Some(if a > 0.0 {
                    -b[0] / a
                } else if b[0] > 0.0 {
                    f64::NEG_INFINITY
                } else if b[0] < 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                })
            }
            Self::PowerNorm { .. } | Self::Barrier { .. } => Some(0.0),
            Self::Linear { b, .. } => Some(if b[0] > 0.0 {
                f64::NEG_INFINITY
            } else if b[0] < 0.0 {
                f64::INFINITY
            } else {
                0.0
            }),
            Self::Affine { base, shift, slope, .. } if slope[0] == 0.0 => base.argmin_1d().map(|m| m + shift[0]),
            _ => None,
        }
    }

    /// Midpoint-convexity check on sampled pairs of domain points.
    pub fn check_convexity(&self, points: &[Vec<f64>], tol: f64) -> bool {
        for x in points {
            for y in points {
                let (fx, fy) = (self.value(x), self.value(y));
                if !fx.is_finite() || !fy.is_finite() {
                    continue;
                }
                for lam in [0.25, 0.5, 0.75] {
                    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| (1.0 - lam) * a + lam * b).collect();
                    let fz = self.value(&z);
                    if fz > (1.0 - lam) * fx + lam * fy + tol * (1.0 + fx.abs() + fy.abs()) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// s·φ for s > 0.
pub(crate) fn scale_potential(p: &Potential, s: f64) -> Result<Potential> {
    Ok(match p {
        Potential::Quadratic { a, b, c } => Potential::Quadratic { a: a * s, b: linalg::scale(b, s), c: c * s },
        Potential::PowerNorm { dim, alpha, p } => Potential::PowerNorm { dim: *dim, alpha: alpha * s, p: *p },
        Potential::Linear { b, c } => Potential::Linear { b: linalg::scale(b, s), c: c * s },
        Potential::Grid(g) => Potential::Grid(GridPotential {
            lattice: g.lattice.clone(),
            values: g.values.iter().map(|v| v * s).collect(),
        }),
        Potential::WithIndicator { base, body } => {
            Potential::WithIndicator { base: Box::new(scale_potential(base, s)?), body: body.clone() }
        }
        Potential::Affine { base, shift, slope, offset } => Potential::Affine {
            base: Box::new(scale_potential(base, s)?),
            shift: shift.clone(),
            slope: linalg::scale(slope, s),
            offset: offset * s,
        },
        Potential::Barrier { dim, radius, scale } => Potential::Barrier { dim: *dim, radius: *radius, scale: scale * s },
        Potential::Support { body } => Potential::Support { body: body.scale(s) },
        _ => return Err(Error::Unsupported("scalar multiple of this potential".into())),
    })
}

/// a ⊆ b, decided from the vertices of a polytope or from two balls.
fn inside(a: &ConvexBody, b: &ConvexBody) -> bool {
    if let (ConvexBody::Ball { center: c1, radius: r1 }, ConvexBody::Ball { center: c2, radius: r2 }) = (a, b) {
        return linalg::norm(&linalg::sub(c1, c2)) + r1 <= *r2;
    }
    a.is_bounded() && a.as_polytope().is_some_and(|p| p.vertices().iter().all(|v| b.contains(v)))
}

/// Intersection of two bodies when it is representable exactly.
pub(crate) fn intersect(a: &ConvexBody, b: &ConvexBody) -> Result<ConvexBody> {
    if a.is_whole_space() {
        return Ok(b.clone());
    }
    if b.is_whole_space() || a == b || inside(a, b) {
        return Ok(a.clone());
    }
    if inside(b, a) {
        return Ok(b.clone());
    }
    match (a, b) {
        (ConvexBody::Box { lo: l1, hi: h1 }, ConvexBody::Box { lo: l2, hi: h2 }) => {
            let lo: Vec<f64> = l1.iter().zip(l2).map(|(x, y)| x.max(*y)).collect();
            let hi: Vec<f64> = h1.iter().zip(h2).map(|(x, y)| x.min(*y)).collect();
            ConvexBody::axis_box(lo, hi).map_err(|_| Error::EmptyDomain)
        }
        _ => {
            if a.dim() == 1 {
                let (l1, h1) = a.bounding_box();
                let (l2, h2) = b.bounding_box();
                return ConvexBody::interval(l1[0].max(l2[0]), h1[0].min(h2[0])).map_err(|_| Error::EmptyDomain);
            }
            Err(Error::Unsupported("intersection of these bodies".into()))
        }
    }
}

fn support_gradient(body: &ConvexBody, x: &[f64]) -> Result<Gradient> {
    match body {
        ConvexBody::Ball { center, radius } => {
            let r = norm(x);
            if r == 0.0 {
                return Ok(Gradient { value: center.clone(), kink: true });
            }
            Ok(Gradient { value: linalg::add(center, &linalg::scale(x, radius / r)), kink: false })
        }
        ConvexBody::Box { lo, hi } => {
            let mut kink = false;
            let value = (0..lo.len())
                .map(|k| {
                    if x[k] > 0.0 {
                        hi[k]
                    } else if x[k] < 0.0 {
                        lo[k]
                    } else {
                        kink = true;
                        if lo[k].abs() <= hi[k].abs() { lo[k] } else { hi[k] }
                    }
                })
                .collect();
            Ok(Gradient { value, kink })
        }
        ConvexBody::Polytope(p) => {
            let vals: Vec<f64> = p.vertices().iter().map(|v| dot(v, x)).collect();
            let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-12 * (1.0 + best.abs());
            let ties: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= best - tol).collect();
            let pick = ties
                .iter()
                .copied()
                .min_by(|&a, &b| norm(&p.vertices()[a]).total_cmp(&norm(&p.vertices()[b])))
                .unwrap();
            Ok(Gradient { value: p.vertices()[pick].clone(), kink: ties.len() > 1 })
        }
        ConvexBody::Ellipsoid(_) => Potential::Support { body: body.clone() }.numeric_gradient(x),
        ConvexBody::Sum(parts) => {
            let mut v = vec![0.0; x.len()];
            let mut kink = false;
            for part in parts {
                let g = support_gradient(part, x)?;
                kink |= g.kink;
                for (vi, gi) in v.iter_mut().zip(&g.value) {
                    *vi += gi;
                }
            }
            Ok(Gradient { value: v, kink })
        }
    }
}

/// Minimizes a convex function on [lo, hi] (possibly unbounded); returns
/// (argmin, min). Unbounded sides are bracketed by doubling steps.
pub(crate) fn min_convex_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    if lo > hi {
        return (f64::NAN, f64::INFINITY);
    }
    if lo.is_finite() && hi.is_finite() {
        return linalg::golden_min(&f, lo, hi);
    }
    let start = if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    };
    let mut a = lo;
    let mut b = hi;
    let fs = f(start);
    if !hi.is_finite() {
        // walk right while decreasing
        let mut step = 1.0;
        let mut prev = (start, fs);
        loop {
            let x = start + step;
            let v = f(x);
            if v >= prev.1 || step > 1e300 {
                b = x;
                break;
            }
            prev = (x, v);
            step *= 2.0;
        }
        if step > 1e300 {
            return (f64::INFINITY, f(b));
        }
    }
    if !lo.is_finite() {
        let mut step = 1.0;
        let mut prev = (start, fs);
        loop {
            let x = start - step;
            let v = f(x);
            if v >= prev.1 || step > 1e300 {
                a = x;
                break;
            }
            prev = (x, v);
            step *= 2.0;
        }
        if step > 1e300 {
            return (f64::NEG_INFINITY, f(a));
        }
    }
    linalg::golden_min(&f, a, b)
}

/// (φ*(y), maximizer) by one-dimensional concave maximization: directly for
/// 1D potentials, through the radial profile for radial ones.
pub(crate) fn numeric_conjugate(phi: &Potential, y: &[f64]) -> (f64, f64) {
    if phi.dim() == 1 {
        let dom = phi.domain().map(|d| d.bounding_box()).unwrap_or((vec![f64::NEG_INFINITY], vec![f64::INFINITY]));
        let obj = |x: f64| {
            let v = phi.value(&[x]);
            if v.is_infinite() {
                f64::INFINITY
            } else {
                v - x * y[0]
            }
        };
        let (x, v) = min_convex_1d(obj, dom.0[0], dom.1[0]);
        if x.is_infinite() {
            return (f64::INFINITY, x);
        }
        return (-v, x);
    }
    if let Potential::WithIndicator { base, body } = phi {
        // sup_{x∈K} ⟨x,y⟩ − ½a|x−m|² − c₀ = ⟨m,y⟩ + |y|²/(2a) − c₀ − ½a·dist(m + y/a, K)²
        if let Some((m, Profile::Quadratic { a, c0 })) = base.radial() {
            let p: Vec<f64> = m.iter().zip(y).map(|(mi, yi)| mi + yi / a).collect();
            let d = body.distance(&p);
            return (dot(&m, y) + dot(y, y) / (2.0 * a) - c0 - 0.5 * a * d * d, f64::NAN);
        }
    }
    if let Some((c, prof)) = phi.radial() {
        let r = norm(y);
        let obj = |s: f64| prof.eval(s) - s * r;
        let (s, v) = min_convex_1d(obj, 0.0, prof.reach());
        if s.is_infinite() {
            return (f64::INFINITY, s);
        }
        return (-v + dot(&c, y), s);
    }
    (f64::NAN, f64::NAN)
}

/// Points of a coarse lattice over a box, for convexity and duality checks.
pub fn sample_points(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut i| {
            let mut p = [0.0; MAX_DIM];
            for k in (0..n).rev() {
                let j = i % per_axis;
                i /= per_axis;
                p[k] = lo[k] + (hi[k] - lo[k]) * (j as f64 + 0.5) / per_axis as f64;
            }
            p[..n].to_vec()
        })
        .collect()
}

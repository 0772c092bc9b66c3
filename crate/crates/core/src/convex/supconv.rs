//! Sup-convolution f ⋆ (t·g), i.e. infimal convolution of potentials.

use super::function::LogConcaveFn;
use super::grid::{GridPotential, Lattice};
use super::potential::{min_convex_1d, Potential, Profile};
use crate::bodies::ConvexBody;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot};

/// x ↦ inf_y φ(y) + ψ(x − y) for the shapes the catalog can evaluate
/// pointwise without a lattice.
#[derive(Debug, Clone)]
pub struct InfConv {
    dim: usize,
    kind: Kind,
    domain: ConvexBody,
}

#[derive(Debug, Clone)]
enum Kind {
    /// inf { base(y) : y ∈ over, x − y ∈ flat } + offset.
    MinOver { base: Potential, over: ConvexBody, flat: ConvexBody, offset: f64, strategy: Strategy },
    /// inf_y f(y) + g(x − y) in one dimension.
    Line { f: Potential, g: Potential },
}

#[derive(Debug, Clone)]
enum Strategy {
    /// base ≡ value on `over`; the result is value on over + flat.
    Flat { value: f64 },
    Interval,
    Radial { center: Vec<f64>, profile: Profile },
    /// Linear base minimized over a clipped polygon (2D).
    Clip { b: Vec<f64>, c: f64 },
}

/// Convex polygon (x − F) ∩ D in the plane, by clipping against D's
/// half-planes. None when empty.
fn clip_polygon(poly: Vec<[f64; 2]>, body: &ConvexBody) -> Option<Vec<[f64; 2]>> {
    let planes: Vec<([f64; 2], f64)> = match body {
        ConvexBody::Box { lo, hi } => {
            let mut v = Vec::new();
            for k in 0..2 {
                let mut e = [0.0; 2];
                e[k] = 1.0;
                if hi[k].is_finite() {
                    v.push((e, hi[k]));
                }
                e[k] = -1.0;
                if lo[k].is_finite() {
                    v.push((e, -lo[k]));
                }
            }
            v
        }
        ConvexBody::Polytope(p) => p.facets().iter().map(|f| ([f.normal[0], f.normal[1]], f.offset)).collect(),
        _ => return None,
    };
    let mut cur = poly;
    for (nrm, off) in planes {
        if cur.is_empty() {
            return None;
        }
        let side = |p: &[f64; 2]| nrm[0] * p[0] + nrm[1] * p[1] - off;
        let mut next = Vec::with_capacity(cur.len() + 1);
        for i in 0..cur.len() {
            let a = cur[i];
            let b = cur[(i + 1) % cur.len()];
            let (sa, sb) = (side(&a), side(&b));
            if sa <= 0.0 {
                next.push(a);
            }
            if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
                let s = sa / (sa - sb);
                next.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        cur = next;
    }
    (!cur.is_empty()).then_some(cur)
}

fn polygon_of(body: &ConvexBody) -> Option<Vec<[f64; 2]>> {
    match body {
        ConvexBody::Box { lo, hi } if body.is_bounded() => {
            Some(vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
        }
        ConvexBody::Polytope(p) => {
            // vertices of a 2D hull are stored in counter-clockwise order
            Some(p.vertices().iter().map(|v| [v[0], v[1]]).collect())
        }
        _ => None,
    }
}

impl InfConv {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &ConvexBody {
        &self.domain
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Line { f, g } => {
                let (flo, fhi) = f.domain().map(|d| d.bounding_box()).unwrap_or((vec![f64::NEG_INFINITY], vec![f64::INFINITY]));
                let (glo, ghi) = g.domain().map(|d| d.bounding_box()).unwrap_or((vec![f64::NEG_INFINITY], vec![f64::INFINITY]));
                let lo = flo[0].max(x[0] - ghi[0]);
                let hi = fhi[0].min(x[0] - glo[0]);
                if lo > hi {
                    return f64::INFINITY;
                }
                let obj = |y: f64| {
                    let a = f.value(&[y]);
                    if a.is_infinite() {
                        return a;
                    }
                    a + g.value(&[x[0] - y])
                };
                min_convex_1d(obj, lo, hi).1
            }
            Kind::MinOver { base, over, flat, offset, strategy } => match strategy {
                Strategy::Flat { value } => {
                    if self.domain.contains(x) {
                        value + offset
                    } else {
                        f64::INFINITY
                    }
                }
                Strategy::Interval => {
                    let (dlo, dhi) = over.bounding_box();
                    let (flo, fhi) = flat.bounding_box();
                    let lo = dlo[0].max(x[0] - fhi[0]);
                    let hi = dhi[0].min(x[0] - flo[0]);
                    if lo > hi + 1e-12 * (1.0 + x[0].abs()) {
                        return f64::INFINITY;
                    }
                    let hi = hi.max(lo);
                    let v = match base.argmin_1d() {
                        Some(m) => base.value(&[m.clamp(lo, hi)]),
                        None => min_convex_1d(|y| base.value(&[y]), lo, hi).1,
                    };
                    v + offset
                }
                Strategy::Radial { center, profile } => {
                    let z = linalg::sub(x, center);
                    profile.eval(flat.distance(&z)) + offset
                }
                Strategy::Clip { b, c } => {
                    let shifted: Vec<[f64; 2]> = polygon_of(flat)
                        .unwrap()
                        .iter()
                        .map(|v| [x[0] - v[0], x[1] - v[1]])
                        .collect();
                    match clip_polygon(shifted, over) {
                        None => f64::INFINITY,
                        Some(poly) => {
                            let m = poly.iter().map(|p| b[0] * p[0] + b[1] * p[1]).fold(f64::INFINITY, f64::min);
                            m + c + offset
                        }
                    }
                }
            },
        }
    }

    pub fn dilate(&self, t: f64) -> Result<Self> {
        let kind = match &self.kind {
            Kind::Line { f, g } => Kind::Line { f: f.dilate(t)?, g: g.dilate(t)? },
            Kind::MinOver { base, over, flat, offset, .. } => {
                let base = base.dilate(t)?;
                return min_over(base, over.scale(t), flat.scale(t), offset * t);
            }
        };
        Ok(Self { dim: self.dim, kind, domain: self.domain.scale(t) })
    }

    /// Some(c) when the infimal convolution is the constant c on its domain.
    pub fn flat_value(&self) -> Option<f64> {
        match &self.kind {
            Kind::MinOver { offset, strategy: Strategy::Flat { value }, .. } => Some(value + offset),
            _ => None,
        }
    }

    /// Kink coordinates along axis k: the base's kinks and minimizer
    /// translated by the corners of the flat body.
    pub(crate) fn breakpoints(&self, k: usize) -> Vec<f64> {
        match &self.kind {
            Kind::MinOver { base, flat, strategy, .. } => {
                let mut anchors = base.breakpoints(k);
                match strategy {
                    Strategy::Radial { center, .. } => anchors.push(center[k]),
                    Strategy::Interval => anchors.extend(base.argmin_1d()),
                    _ => {}
                }
                let poly = if self.dim == 2 { polygon_of(flat) } else { None };
                let corners: Vec<f64> = match poly {
                    Some(poly) => poly.iter().map(|v| v[k]).collect(),
                    None if flat.is_bounded() => {
                        let (lo, hi) = flat.bounding_box();
                        vec![lo[k], hi[k]]
                    }
                    None => Vec::new(),
                };
                anchors.iter().flat_map(|a| corners.iter().map(move |c| a + c)).filter(|v| v.is_finite()).collect()
            }
            Kind::Line { .. } => Vec::new(),
        }
    }

    pub fn infimum(&self) -> Option<f64> {
        match &self.kind {
            Kind::MinOver { base, offset, strategy, .. } => match strategy {
                Strategy::Flat { value } => Some(value + offset),
                Strategy::Radial { profile, .. } => Some(profile.eval(0.0) + offset),
                _ => base.infimum().map(|v| v + offset),
            },
            Kind::Line { f, g } => Some(f.infimum()? + g.infimum()?),
        }
    }

    pub fn center_hint(&self) -> Vec<f64> {
        match &self.kind {
            Kind::MinOver { flat, strategy: Strategy::Radial { center, .. }, .. } => {
                linalg::add(center, &flat.interior_point())
            }
            Kind::MinOver { over, flat, .. } => linalg::add(&over.interior_point(), &flat.interior_point()),
            Kind::Line { f, g } => linalg::add(&f.center_hint(), &g.center_hint()),
        }
    }
}

/// Splits φ into (base, D) with φ = base + Ind_D.
fn split_indicator(p: &Potential) -> Result<(Potential, ConvexBody)> {
    match p {
        Potential::WithIndicator { base, body } => Ok(((**base).clone(), body.clone())),
        _ => Ok((p.clone(), p.domain()?)),
    }
}

fn min_over(base: Potential, over: ConvexBody, flat: ConvexBody, offset: f64) -> Result<InfConv> {
    let n = base.dim();
    let domain = over.minkowski_sum(&flat)?;
    let strategy = if let Some(value) = base.flat_value() {
        Strategy::Flat { value }
    } else if n == 1 {
        Strategy::Interval
    } else if let (Some((center, profile)), true) =
        (base.radial(), over.is_whole_space() || matches!(base, Potential::Barrier { .. }))
    {
        Strategy::Radial { center, profile }
    } else if let (Potential::Linear { b, c }, 2, true) = (&base, n, polygon_of(&flat).is_some()) {
        Strategy::Clip { b: b.clone(), c: *c }
    } else {
        return Err(Error::Unsupported("pointwise infimal convolution for this pair".into()));
    };
    Ok(InfConv { dim: n, kind: Kind::MinOver { base, over, flat, offset, strategy }, domain })
}

/// Canonical (A, b, c) for quadratic potentials, also behind affine layers.
pub(crate) fn as_quadratic(p: &Potential) -> Option<(nalgebra::DMatrix<f64>, Vec<f64>, f64)> {
    match p {
        Potential::Quadratic { a, b, c } => Some((a.clone(), b.clone(), *c)),
        Potential::PowerNorm { dim, alpha, p } if *p == 2.0 => {
            Some((nalgebra::DMatrix::identity(*dim, *dim) * (2.0 * alpha), vec![0.0; *dim], 0.0))
        }
        Potential::Affine { base, shift, slope, offset } => {
            // ½(x−s)ᵀA(x−s) + ⟨b, x−s⟩ + c + ⟨v,x⟩ + o
            let (a, b, c) = as_quadratic(base)?;
            let as_ = linalg::mat_vec(&a, shift);
            let nb: Vec<f64> = (0..b.len()).map(|i| b[i] - as_[i] + slope[i]).collect();
            let nc = 0.5 * dot(shift, &as_) - dot(&b, shift) + c + offset;
            Some((a, nb, nc))
        }
        _ => None,
    }
}

/// Strips an affine layer with zero slope: φ(x) = core(x − shift) + offset.
fn strip_translation(p: &Potential) -> (Potential, Vec<f64>, f64) {
    match p {
        Potential::Affine { base, shift, slope, offset } if slope.iter().all(|v| *v == 0.0) => {
            ((**base).clone(), shift.clone(), *offset)
        }
        _ => (p.clone(), vec![0.0; p.dim()], 0.0),
    }
}

/// Potential of f ⋆ ψ-function where both potentials are given (ψ already
/// dilated).
pub(crate) fn inf_convolve(pf: &Potential, pg: &Potential) -> Result<Potential> {
    check_dim(pf.dim(), pg.dim())?;
    let n = pf.dim();
    if let (Some((a, b, c)), Some((bm, d, e))) = (as_quadratic(pf), as_quadratic(pg)) {
        if let (Some(ai), Some(bi)) = (a.clone().try_inverse(), bm.clone().try_inverse()) {
            if linalg::is_spd(&a) && linalg::is_spd(&bm) {
                let m = &ai + &bi;
                let mv = linalg::add(&linalg::mat_vec(&ai, &b), &linalg::mat_vec(&bi, &d));
                let k = 0.5 * linalg::quad_form(&ai, &b) - c + 0.5 * linalg::quad_form(&bi, &d) - e;
                let mi = m.try_inverse().ok_or_else(|| Error::Internal("singular quadratic sum".into()))?;
                let nb = linalg::mat_vec(&mi, &mv);
                let nc = 0.5 * dot(&mv, &nb) - k;
                return Ok(Potential::Quadratic { a: mi, b: nb, c: nc });
            }
        }
    }
    let (cf, sf, of) = strip_translation(pf);
    let (cg, sg, og) = strip_translation(pg);
    let shift = linalg::add(&sf, &sg);
    let offset = of + og;
    let wrap = |core: Potential| Potential::affine(core, shift.clone(), vec![0.0; n], offset);
    let (bf, df) = split_indicator(&cf)?;
    let (bg, dg) = split_indicator(&cg)?;
    if let Some(vg) = bg.flat_value() {
        return Ok(wrap(Potential::InfConv(Box::new(min_over(bf, df, dg, vg)?))));
    }
    if let Some(vf) = bf.flat_value() {
        return Ok(wrap(Potential::InfConv(Box::new(min_over(bg, dg, df, vf)?))));
    }
    if n == 1 {
        let domain = cf.domain()?.minkowski_sum(&cg.domain()?)?;
        return Ok(wrap(Potential::InfConv(Box::new(InfConv { dim: 1, kind: Kind::Line { f: cf, g: cg }, domain }))));
    }
    Err(Error::Unsupported("closed-form infimal convolution for this pair; use the lattice route".into()))
}

/// f ⋆ (t·g). At t = 0 returns f.
pub fn sup_convolve(f: &LogConcaveFn, g: &LogConcaveFn, t: f64) -> Result<LogConcaveFn> {
    check_dim(f.dim(), g.dim())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("sup-convolution parameter must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let pg = g.potential().dilate(t)?;
    let pot = inf_convolve(f.potential(), &pg)?;
    let support = f.support().minkowski_sum(&g.support().scale(t))?;
    LogConcaveFn::with_support(pot, support)
}

/// Lattice route: discrete infimal convolution of sampled potentials by
/// exhaustive minimization. Cost O(N²) in the number of lattice nodes.
pub fn grid_sup_convolve(f: &LogConcaveFn, g: &LogConcaveFn, t: f64, per_axis: usize) -> Result<LogConcaveFn> {
    check_dim(f.dim(), g.dim())?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let n = f.dim();
    let pg = g.potential().dilate(t)?;
    let window = |h: &LogConcaveFn, s: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let env = h.envelope()?;
        let (blo, bhi) = h.support().bounding_box();
        let r = if h.support().is_bounded() { env.radius } else { super::integrate::truncation_radius(h, 1e-12)? };
        let lo = (0..n).map(|k| blo[k].max(env.center[k] - r) * s).collect();
        let hi = (0..n).map(|k| bhi[k].min(env.center[k] + r) * s).collect();
        Ok((lo, hi))
    };
    let (flo, fhi) = window(f, 1.0)?;
    let (glo, ghi) = window(g, t)?;
    // one common spacing so that node sums land on nodes
    let h = (0..n).map(|k| ((fhi[k] - flo[k]).max(ghi[k] - glo[k])) / (per_axis - 1) as f64).fold(0.0, f64::max);
    let lat = |lo: &[f64], hi: &[f64]| {
        let counts: Vec<usize> = (0..n).map(|k| (((hi[k] - lo[k]) / h).round() as usize + 1).max(2)).collect();
        Lattice::new(lo.to_vec(), vec![h; n], counts)
    };
    let lf = lat(&flo, &fhi)?;
    let lg = lat(&glo, &ghi)?;
    let vf: Vec<f64> = (0..lf.len()).map(|i| f.potential().value(&lf.node(i))).collect();
    let vg: Vec<f64> = (0..lg.len()).map(|i| pg.value(&lg.node(i))).collect();
    let origin: Vec<f64> = (0..n).map(|k| lf.origin[k] + lg.origin[k]).collect();
    let counts: Vec<usize> = (0..n).map(|k| lf.counts[k] + lg.counts[k] - 1).collect();
    let out_lat = Lattice::new(origin, vec![h; n], counts)?;
    let mut out = vec![f64::INFINITY; out_lat.len()];
    for i in 0..lf.len() {
        if !vf[i].is_finite() {
            continue;
        }
        let mi = lf.multi(i);
        for j in 0..lg.len() {
            if !vg[j].is_finite() {
                continue;
            }
            let mj = lg.multi(j);
            let idx: Vec<usize> = (0..n).map(|k| mi[k] + mj[k]).collect();
            let o = out_lat.flat(&idx);
            let v = vf[i] + vg[j];
            if v < out[o] {
                out[o] = v;
            }
        }
    }
    let grid = GridPotential::new(out_lat, out)?;
    let support = grid.finite_region()?;
    LogConcaveFn::with_support(Potential::Grid(grid), support)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_1d(f: &LogConcaveFn, g: &LogConcaveFn, t: f64, x: f64) -> f64 {
        // sup_y f(y) g((x−y)/t)^t over a fine grid of y
        let m = 200_000;
        let (lo, hi) = (-12.0, 12.0);
        (0..=m)
            .map(|i| {
                let y = lo + (hi - lo) * i as f64 / m as f64;
                let gv = g.evaluate(&[(x - y) / t]);
                f.evaluate(&[y]) * gv.powf(t)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_with_interval_matches_brute_force() {
        let f = LogConcaveFn::gaussian(1);
        let g = LogConcaveFn::indicator(ConvexBody::interval(-1.0, 1.0).unwrap());
        for t in [0.25, 1.0] {
            let h = sup_convolve(&f, &g, t).unwrap();
            for x in [-2.0, -0.3, 0.0, 0.9, 1.7] {
                let closed = (-(f64::max(f64::abs(x) - t, 0.0)).powi(2) / 2.0).exp();
                assert!((h.evaluate(&[x]) - closed).abs() < 1e-12);
                assert!((h.evaluate(&[x]) - brute_1d(&f, &g, t, x)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn self_convolution_is_dilation() {
        let f = LogConcaveFn::gaussian(1);
        let h = sup_convolve(&f, &f, 1.0).unwrap();
        let d = f.dilate(2.0).unwrap();
        for x in [-3.0, -1.0, 0.0, 0.5, 2.5] {
            assert!((h.evaluate(&[x]) - d.evaluate(&[x])).abs() < 1e-12);
            assert!((h.evaluate(&[x]) - (-x * x / 4.0f64).exp()).abs() < 1e-12);
        }
        let half = LogConcaveFn::half_exponential(1);
        let h = sup_convolve(&half, &half, 1.0).unwrap();
        let d = half.dilate(2.0).unwrap();
        for x in [0.1, 0.5, 3.0] {
            assert!((h.evaluate(&[x]) - d.evaluate(&[x])).abs() < 1e-9);
        }
    }

    #[test]
    fn indicators_add_supports() {
        let k = LogConcaveFn::indicator(ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
        let l = LogConcaveFn::indicator(ConvexBody::unit_ball(2));
        let h = sup_convolve(&k, &l, 0.5).unwrap();
        assert_eq!(h.evaluate(&[1.3, 1.3]), 1.0);
        assert_eq!(h.evaluate(&[1.4, 1.4]), 0.0);
        assert_eq!(h.evaluate(&[1.5, 0.0]), 1.0);
    }

    #[test]
    fn orthant_exponential_with_square() {
        let f = LogConcaveFn::half_exponential(2);
        let g = LogConcaveFn::indicator(ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
        let h = sup_convolve(&f, &g, 0.5).unwrap();
        // sup over |z|∞ ≤ 1/2 of e^{−(x−z)₁−(x−z)₂} on the orthant
        assert!((h.evaluate(&[1.0, 2.0]) - (-2.0f64).exp()).abs() < 1e-14);
        assert!((h.evaluate(&[-0.4, 0.2]) - 1.0).abs() < 1e-14);
        assert_eq!(h.evaluate(&[-0.6, 0.2]), 0.0);
    }

    #[test]
    fn lattice_route_agrees_with_closed_form() {
        let f = LogConcaveFn::gaussian(1);
        let g = LogConcaveFn::indicator(ConvexBody::interval(-1.0, 1.0).unwrap());
        let grid = grid_sup_convolve(&f, &g, 0.5, 801).unwrap();
        let exact = sup_convolve(&f, &g, 0.5).unwrap();
        for x in [-1.0, 0.0, 0.7, 2.0] {
            let (a, b) = (grid.evaluate(&[x]), exact.evaluate(&[x]));
            assert!((a - b).abs() < 2e-3, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn monotone_in_t_for_normalized_g() {
        let f = LogConcaveFn::half_exponential(1);
        let g = LogConcaveFn::gaussian(1);
        let xs = [-0.5, 0.2, 1.0, 3.0];
        let mut prev = xs.map(|x| f.evaluate(&[x]));
        for t in [0.1, 0.5, 1.0, 2.0] {
            let h = sup_convolve(&f, &g, t).unwrap();
            for (i, x) in xs.iter().enumerate() {
                let v = h.evaluate(&[*x]);
                assert!(v >= prev[i] - 1e-12);
                prev[i] = v;
            }
        }
    }
}

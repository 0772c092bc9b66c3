use rayon::prelude::*;

use super::grid::{level_points, tv_grid, GridField};
use super::{tv_representation, TVDecomposition};
use crate::bodies::{anisotropic_perimeter, ConvexBody};
use crate::convex::{as_quadratic, min_convex_1d, LogConcaveFn, Potential, QuadratureSpec};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, compensated_sum};
use crate::measures::boundary_rule;
use crate::quadrature::{panel_breaks, GaussLegendre};

/// Composite Gauss–Legendre rule in u = log(top/s) over s ∈ [top·e^{−depth}, top],
/// i.e. geometric spacing in s towards 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    pub panels: usize,
    pub order: usize,
    pub depth: f64,
}

impl Default for LevelGrid {
    fn default() -> Self {
        Self { panels: 32, order: 8, depth: 40.0 }
    }
}

impl LevelGrid {
    /// (s, weight) pairs for ∫₀^top ψ(s) ds; the part below top·e^{−depth}
    /// is dropped.
    pub fn nodes(&self, top: f64) -> Vec<(f64, f64)> {
        self.nodes_between(top * (-self.depth).exp(), top)
    }

    pub fn nodes_between(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let rule = GaussLegendre::new(self.order).expect("valid order");
        let u_max = (hi / lo).ln();
        let breaks = panel_breaks(0.0, u_max, self.panels, None);
        rule.composite(&breaks)
            .into_iter()
            .map(|(u, w)| {
                let s = hi * (-u).exp();
                (s, w * s)
            })
            .collect()
    }
}

/// {φ ≤ level} for potentials with closed-form sublevel sets.
fn sublevel(p: &Potential, support: &ConvexBody, level: f64) -> Result<ConvexBody> {
    let n = p.dim();
    if let Some(c) = p.flat_value() {
        return if c <= level { Ok(support.clone()) } else { Err(Error::EmptyLevelSet((-level).exp())) };
    }
    if n == 1 {
        return sublevel_1d(p, support, level);
    }
    let empty = || Error::EmptyLevelSet((-level).exp());
    if let Some((center, prof)) = p.radial() {
        if support.is_whole_space() || matches!(p, Potential::Barrier { .. }) {
            let r = prof.inverse(level).ok_or_else(empty)?;
            if r == 0.0 {
                return Err(empty());
            }
            if r.is_infinite() {
                return Err(Error::Unbounded);
            }
            return ConvexBody::ball(center, r);
        }
    }
    if let (Some((a, b, c)), true) = (as_quadratic(p), support.is_whole_space()) {
        if linalg::is_spd(&a) {
            let inv = a.clone().try_inverse().ok_or(Error::Internal("singular quadratic".into()))?;
            let m = linalg::scale(&linalg::mat_vec(&inv, &b), -1.0);
            let d = level - (c - 0.5 * linalg::dot(&b, &linalg::mat_vec(&inv, &b)));
            if d <= 0.0 {
                return Err(empty());
            }
            return ConvexBody::ellipsoid(m, inv * (2.0 * d));
        }
    }
    match p {
        Potential::Affine { base, shift, slope, offset } if slope.iter().all(|v| *v == 0.0) => {
            let inner = sublevel(base, &support.translate(&linalg::scale(shift, -1.0)), level - offset)?;
            Ok(inner.translate(shift))
        }
        Potential::WithIndicator { base, body } if n == 2 => match &**base {
            Potential::Linear { b, c } => halfplane_cut(body, b, level - c).ok_or_else(empty)?,
            _ => Err(Error::Unsupported("level sets of this restricted potential".into())),
        },
        _ => Err(Error::Unsupported("closed-form level sets of this potential".into())),
    }
}

fn sublevel_1d(p: &Potential, support: &ConvexBody, level: f64) -> Result<ConvexBody> {
    let (lo, hi) = support.bounding_box();
    let phi = |x: f64| p.value(&[x]);
    let (m, v) = min_convex_1d(phi, lo[0], hi[0]);
    if !(v < level) || !m.is_finite() {
        return Err(Error::EmptyLevelSet((-level).exp()));
    }
    let end = |dir: f64, limit: f64| -> f64 {
        // bracket then bisect on the predicate φ ≤ level
        let mut step = 1.0;
        let mut inside = m;
        let mut outside = loop {
            let x = m + dir * step;
            if (dir > 0.0 && x >= limit) || (dir < 0.0 && x <= limit) {
                if phi(limit) <= level {
                    return limit;
                }
                break limit;
            }
            if phi(x) > level {
                break x;
            }
            inside = x;
            step *= 2.0;
            if step > 1e300 {
                return dir * f64::INFINITY;
            }
        };
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if phi(mid) <= level {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let (a, b) = (end(-1.0, lo[0]), end(1.0, hi[0]));
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Unbounded);
    }
    ConvexBody::interval(a, b).map_err(|_| Error::EmptyLevelSet((-level).exp()))
}

fn halfplane_cut(body: &ConvexBody, normal: &[f64], offset: f64) -> Option<Result<ConvexBody>> {
    // vertices of the body clipped to a large box, then to ⟨normal, x⟩ ≤ offset
    let big = 1e6;
    let poly: Vec<[f64; 2]> = match body {
        ConvexBody::Box { lo, hi } => {
            let c = |k: usize| (lo[k].max(-big), hi[k].min(big));
            let ((a0, b0), (a1, b1)) = (c(0), c(1));
            vec![[a0, a1], [b0, a1], [b0, b1], [a0, b1]]
        }
        ConvexBody::Polytope(p) => p.vertices().iter().map(|v| [v[0], v[1]]).collect(),
        _ => return Some(Err(Error::Unsupported("level sets of linear potentials on this body".into()))),
    };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (dp, dq) = (
            normal[0] * p[0] + normal[1] * p[1] - offset,
            normal[0] * q[0] + normal[1] * q[1] - offset,
        );
        if dp <= 0.0 {
            out.push(vec![p[0], p[1]]);
        }
        if (dp < 0.0) != (dq < 0.0) && dp != dq {
            let s = dp / (dp - dq);
            out.push(vec![p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
        }
    }
    if out.len() < 3 {
        return None;
    }
    if out.iter().flatten().any(|v| v.abs() >= 0.5 * big) {
        return Some(Err(Error::Unbounded));
    }
    Some(ConvexBody::polytope(&out))
}

/// F_s = {f ≥ s} in closed form.
pub fn level_set(f: &LogConcaveFn, s: f64) -> Result<ConvexBody> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {s}")));
    }
    if let Some(top) = f.max_value() {
        if s > top {
            return Err(Error::EmptyLevelSet(s));
        }
    }
    sublevel(f.potential(), f.support(), -s.ln())
}

/// F_s for a sampled field: convex hull of the region where the piecewise
/// linear interpolant along lattice lines is ≥ s.
pub fn level_set_grid(field: &GridField, s: f64) -> Result<ConvexBody> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {s}")));
    }
    let pts = level_points(field, s);
    if pts.is_empty() {
        return Err(Error::EmptyLevelSet(s));
    }
    ConvexBody::polytope(&pts)
}

/// Per_L(F) = ∫_{∂F} h_L(n) dH^{n−1}.
pub fn perimeter(body: &ConvexBody, l: &ConvexBody, spec: &QuadratureSpec) -> Result<f64> {
    check_dim(body.dim(), l.dim())?;
    if !body.is_bounded() {
        return Err(Error::Unbounded);
    }
    match body {
        ConvexBody::Polytope(_) | ConvexBody::Box { .. } => anisotropic_perimeter(body, l),
        ConvexBody::Ball { .. } | ConvexBody::Ellipsoid(_) if body.dim() == 1 => {
            let (lo, hi) = body.bounding_box();
            anisotropic_perimeter(&ConvexBody::interval(lo[0], hi[0])?, l)
        }
        // in the plane Per_L(F) = 2V(F, L) is symmetric in F and L
        _ if body.dim() == 2 && l.as_polytope().is_some() => anisotropic_perimeter(l, body),
        _ => {
            let nodes = boundary_rule(body, spec, &vec![0.0; body.dim()], f64::INFINITY)?;
            Ok(compensated_sum(nodes.iter().map(|b| b.weight * l.support(&b.normal))))
        }
    }
}

/// TV_L(f) against ∫Per_L(F_s) ds, with the coarea curve (s, Per_L(F_s)).
#[derive(Debug, Clone, PartialEq)]
pub struct CoareaCheck {
    pub total_variation: f64,
    pub level_integral: f64,
    /// |TV − ∫Per| / TV.
    pub residual: f64,
    pub curve: Vec<(f64, f64)>,
}

fn finish(tv: f64, curve: Vec<(f64, f64)>, weights: &[f64]) -> CoareaCheck {
    let level_integral = compensated_sum(curve.iter().zip(weights).map(|((_, p), w)| p * w));
    let residual = if tv == 0.0 { level_integral.abs() } else { ((tv - level_integral) / tv).abs() };
    CoareaCheck { total_variation: tv, level_integral, residual, curve }
}

fn grid_curve(field: &GridField, l: &ConvexBody, levels: &LevelGrid) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    check_dim(field.dim(), l.dim())?;
    if !field.is_log_concave(1e-9) {
        return Err(Error::InvalidArgument("coarea check needs a log-concave field".into()));
    }
    let top = field.max();
    // below the smallest positive sample the interpolated level sets vary
    // linearly; a few Gauss panels on [0, s_min] cover them
    let s_min = field.min_positive().min(top);
    let mut nodes = levels.nodes_between(s_min, top);
    let rule = GaussLegendre::new(levels.order)?;
    nodes.extend(rule.composite(&panel_breaks(0.0, s_min, 4, None)));
    let per = |s: f64| -> Result<f64> {
        match level_set_grid(field, s) {
            Ok(b) => anisotropic_perimeter(&b, l),
            // a single row or column of nodes above s: a segment, counted twice
            Err(Error::DegeneratePolytope) => {
                let pts = level_points(field, s);
                let (mut best, mut pair) = (0.0, (0, 0));
                for i in 0..pts.len() {
                    for j in i + 1..pts.len() {
                        let d = linalg::dist(&pts[i], &pts[j]);
                        if d > best {
                            best = d;
                            pair = (i, j);
                        }
                    }
                }
                if best == 0.0 {
                    return Ok(0.0);
                }
                let u = linalg::scale(&linalg::sub(&pts[pair.1], &pts[pair.0]), 1.0 / best);
                let nrm = if u.len() == 2 { vec![-u[1], u[0]] } else { u.clone() };
                Ok(best * (l.support(&nrm) + l.support(&linalg::scale(&nrm, -1.0))))
            }
            Err(e) => Err(e),
        }
    };
    let curve = nodes.par_iter().map(|&(s, _)| Ok((s, per(s)?))).collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = nodes.iter().map(|(_, w)| *w).collect();
    Ok((curve, weights))
}

/// Coarea check on a sampled field: TV from forward differences, level sets
/// from the interpolant.
pub fn coarea_check_grid(field: &GridField, l: &ConvexBody, levels: &LevelGrid) -> Result<CoareaCheck> {
    let (curve, weights) = grid_curve(field, l, levels)?;
    Ok(finish(tv_grid(field, l)?, curve, &weights))
}

/// Coarea check with TV_L(f) from the measure representation of f and level
/// sets from the interpolant of `field`, a sampling of f.
pub fn coarea_check_sampled(
    f: &LogConcaveFn,
    field: &GridField,
    l: &ConvexBody,
    levels: &LevelGrid,
    spec: &QuadratureSpec,
) -> Result<CoareaCheck> {
    check_dim(f.dim(), field.dim())?;
    let (curve, weights) = grid_curve(field, l, levels)?;
    Ok(finish(tv_representation(f, l, spec)?.total(), curve, &weights))
}

/// Coarea check for a function with closed-form level sets; TV_L from the
/// measure representation.
pub fn coarea_check(f: &LogConcaveFn, l: &ConvexBody, levels: &LevelGrid, spec: &QuadratureSpec) -> Result<CoareaCheck> {
    let TVDecomposition { absolutely_continuous, boundary } = tv_representation(f, l, spec)?;
    let top = f
        .max_value()
        .ok_or_else(|| Error::Unsupported("level sets need a closed-form maximum of f".into()))?;
    let nodes = levels.nodes(top);
    let curve = nodes
        .par_iter()
        .map(|&(s, _)| Ok((s, perimeter(&level_set(f, s)?, l, spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = nodes.iter().map(|(_, w)| *w).collect();
    Ok(finish(absolutely_continuous + boundary, curve, &weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn closed_form_level_sets() {
        let k = ConvexBody::axis_box(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert_eq!(level_set(&LogConcaveFn::indicator(k.clone()), 0.3).unwrap(), k);
        let e = LogConcaveFn::power(1, 1.0, 1.0).unwrap();
        let (lo, hi) = level_set(&e, (-2.0f64).exp()).unwrap().bounding_box();
        assert_relative_eq!(lo[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(hi[0], 2.0, epsilon = 1e-12);
        let g = LogConcaveFn::gaussian(2);
        match level_set(&g, (-0.5f64).exp()).unwrap() {
            ConvexBody::Ball { center, radius } => {
                assert_eq!(center, vec![0.0, 0.0]);
                assert_relative_eq!(radius, 1.0, max_relative = 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(level_set(&g, 1.5), Err(Error::EmptyLevelSet(1.5)));
    }

    #[test]
    fn orthant_exponential_level_set_is_a_triangle() {
        let f = LogConcaveFn::half_exponential(2);
        let t = level_set(&f, (-3.0f64).exp()).unwrap();
        assert_relative_eq!(t.volume().unwrap(), 4.5, max_relative = 1e-12);
    }

    #[test]
    fn perimeter_of_disk_against_square() {
        let disk = ConvexBody::ball(vec![0.3, 0.0], 2.0).unwrap();
        let sq = ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        // r ∫(|cos| + |sin|) dθ = 8r
        assert_relative_eq!(perimeter(&disk, &sq, &spec()).unwrap(), 16.0, max_relative = 1e-6);
        assert_relative_eq!(perimeter(&disk, &ConvexBody::unit_ball(2), &spec()).unwrap(), 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn coarea_for_closed_forms() {
        let f = LogConcaveFn::power(1, 1.0, 1.0).unwrap();
        for (l, expect) in [((-1.0, 1.0), 2.0), ((-1.0, 2.0), 3.0)] {
            let l = ConvexBody::interval(l.0, l.1).unwrap();
            let c = coarea_check(&f, &l, &LevelGrid::default(), &spec()).unwrap();
            assert_relative_eq!(c.total_variation, expect, max_relative = 1e-9);
            assert_relative_eq!(c.level_integral, expect, max_relative = 1e-9);
            assert!(c.curve.iter().all(|(_, p)| (p - expect).abs() < 1e-9));
        }
    }

    #[test]
    fn coarea_on_one_dimensional_grid() {
        let f = LogConcaveFn::power(1, 1.0, 1.0).unwrap();
        let field = GridField::sample(&f, &[-40.0], &[40.0], 4096).unwrap();
        let c = coarea_check_grid(&field, &ConvexBody::interval(-1.0, 2.0).unwrap(), &LevelGrid::default()).unwrap();
        assert!(c.residual < 1e-9, "{c:?}");
    }
}

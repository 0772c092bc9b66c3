use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DiscreteMeasure, Provenance};
use crate::bodies::ConvexBody;
use crate::convex::{Clipped, LogConcaveFn, Potential, QuadratureSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, norm, KahanSum};
use crate::quadrature::{adaptive, tensor_nodes, GaussLegendre};

/// Largest tolerated fraction of quadrature nodes without a usable gradient.
const MAX_BAD_FRACTION: f64 = 1e-3;

/// Quadrature node on ∂K: position, outward unit normal and surface weight.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryNode {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

/// Truncation radius for quadrature boxes. Uses the certified envelope
/// radius, shrunk to where every sampled ray has decayed below the tail
/// tolerance (with a 20% margin).
pub(crate) fn effective_radius(f: &LogConcaveFn, tol: f64) -> Result<f64> {
    let certified = crate::convex::truncation_radius(f, tol)?;
    let env = f.envelope()?;
    let n = f.dim();
    let mass = f.integral()?;
    let p = f.potential();
    let x0 = &env.center;
    let dirs = linalg::directions(n, if n == 2 { 64 } else { 128 });
    let mut worst: f64 = 0.0;
    for u in &dirs {
        let at = |r: f64| p.value(&linalg::add(x0, &linalg::scale(u, r)));
        let mut r = env.radius.max(0.5);
        loop {
            let (a, b) = (at(0.5 * r), at(r));
            if b.is_infinite() {
                break;
            }
            let sigma = (b - a) / (0.5 * r);
            if sigma > 0.0 {
                // ∫_r^∞ s^{n−1}(1+s) e^{−b−σ(s−r)} ds, bounded crudely
                let poly = (1.0 + r + 1.0 / sigma).powi(n as i32) * (1..=n).product::<usize>() as f64;
                let tail = (-b).exp() * poly / sigma;
                if tail <= tol * mass {
                    break;
                }
            }
            if r > certified {
                break;
            }
            r *= 1.125;
        }
        worst = worst.max(r);
    }
    Ok((1.2 * worst).min(certified))
}

fn jitter_rng(spec: &QuadratureSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

/// Quadrature nodes and weights for ∫·dx over the support of f.
fn volume_nodes(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = f.dim();
    let env = f.envelope()?;
    let r = effective_radius(f, spec.tail_tol)?;
    let mut rng = jitter_rng(spec);
    let amp = spec.jitter * 2.0 * r;
    let mut nodes = Vec::new();
    let p = f.potential();
    let radial = p.radial().filter(|_| f.support().is_whole_space() || matches!(p, Potential::Barrier { .. }));
    if let (Some((center, prof)), 2) = (radial, n) {
        // polar rule: Gauss–Legendre in the radius, uniform in the angle
        let rule = GaussLegendre::new(spec.order)?;
        let reach = prof.reach().min(r);
        let radial_panels = spec.panels / 2;
        let breaks = crate::quadrature::panel_breaks(0.0, reach, radial_panels, None);
        let angles = 8 * spec.panels;
        let step = 2.0 * std::f64::consts::PI / angles as f64;
        for (s, w) in rule.composite(&breaks) {
            for k in 0..angles {
                let a = (k as f64 + 0.5) * step;
                let x = vec![center[0] + s * a.cos(), center[1] + s * a.sin()];
                nodes.push((x, w * s * step));
            }
        }
    } else {
        let region = Clipped::new(f.support(), &env.center, r);
        let rule = GaussLegendre::new(spec.order)?;
        tensor_nodes(&region, &rule, spec.panels_for(n), &mut |x, w| nodes.push((x.to_vec(), w)));
    }
    for (x, _) in nodes.iter_mut() {
        for xi in x.iter_mut() {
            *xi += amp * rng.gen_range(-1.0..1.0);
        }
    }
    Ok(nodes)
}

/// Potential of the form ψ(x − a) + c with ψ = α|·| in 1D.
fn abs_kink_1d(p: &Potential) -> Option<(f64, f64)> {
    match p {
        Potential::PowerNorm { dim: 1, alpha, p } if *p == 1.0 => Some((0.0, *alpha)),
        Potential::Affine { base, shift, slope, .. } if slope[0] == 0.0 => {
            abs_kink_1d(base).map(|(a, alpha)| (a + shift[0], alpha))
        }
        _ => None,
    }
}

/// μ_f = (∇φ)♯(f dx) as a weighted point cloud.
pub fn build_mu(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<DiscreteMeasure> {
    let n = f.dim();
    let mass = f.check_integrable()?;
    let mut m = DiscreteMeasure::euclidean(n, Provenance::Mu);
    let p = f.potential();
    // exact cases
    if p.flat_value().is_some() {
        m.push(&vec![0.0; n], mass);
        return Ok(m);
    }
    let linear = match p {
        Potential::Linear { b, .. } => Some(b.clone()),
        Potential::WithIndicator { base, .. } => match &**base {
            Potential::Linear { b, .. } => Some(b.clone()),
            _ => None,
        },
        _ => None,
    };
    if let Some(b) = linear {
        m.push(&b, mass);
        return Ok(m);
    }
    if let (1, Some((a, alpha))) = (n, abs_kink_1d(p)) {
        let (lo, hi) = f.support().bounding_box();
        let r = crate::convex::truncation_radius(f, spec.tail_tol)?;
        let env = f.envelope()?;
        let (lo, hi) = (lo[0].max(env.center[0] - r), hi[0].min(env.center[0] + r));
        let side = |x0: f64, x1: f64| {
            adaptive(|x| f.evaluate(&[x]), x0, x1, &[], 1e-15 * mass, spec.rel_tol, 4000).value
        };
        m.push(&[-alpha], side(lo, a.clamp(lo, hi)));
        m.push(&[alpha], side(a.clamp(lo, hi), hi));
        return Ok(m);
    }
    let nodes = volume_nodes(f, spec)?;
    let results: Vec<Option<(Vec<f64>, f64)>> = nodes
        .par_iter()
        .map(|(x, w)| {
            let v = f.evaluate(x);
            if v == 0.0 {
                return Some((Vec::new(), 0.0));
            }
            match p.gradient(x) {
                Ok(g) if !g.kink => Some((g.value, w * v)),
                _ => None,
            }
        })
        .collect();
    let bad = results.iter().filter(|r| r.is_none()).count();
    if bad as f64 > MAX_BAD_FRACTION * nodes.len() as f64 {
        return Err(Error::Quadrature(format!("gradient unavailable at {bad} of {} nodes", nodes.len())));
    }
    for (g, w) in results.into_iter().flatten() {
        if w > 0.0 {
            m.push(&g, w);
        }
    }
    Ok(m)
}

fn segment_nodes(a: &[f64], b: &[f64], normal: &[f64], rule: &GaussLegendre, panels: usize, out: &mut Vec<BoundaryNode>) {
    let len = linalg::dist(a, b);
    let breaks = crate::quadrature::panel_breaks(0.0, 1.0, panels, None);
    for (s, w) in rule.composite(&breaks) {
        let point: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect();
        out.push(BoundaryNode { point, normal: normal.to_vec(), weight: w * len });
    }
}

fn triangle_nodes(p0: &[f64], p1: &[f64], p2: &[f64], normal: &[f64], rule: &GaussLegendre, out: &mut Vec<BoundaryNode>) {
    // collapsed square: x = p0 + u((1−v)(p1−p0) + v(p2−p0)), dA = 2|T| u du dv
    let e1 = linalg::sub(p1, p0);
    let e2 = linalg::sub(p2, p0);
    let area = 0.5 * norm(&linalg::cross3(&e1, &e2));
    let nodes: Vec<(f64, f64)> = rule.composite(&[0.0, 1.0]);
    for &(u, wu) in &nodes {
        for &(v, wv) in &nodes {
            let point: Vec<f64> = (0..3).map(|k| p0[k] + u * ((1.0 - v) * e1[k] + v * e2[k])).collect();
            out.push(BoundaryNode { point, normal: normal.to_vec(), weight: 2.0 * area * u * wu * wv });
        }
    }
}

/// Quadrature rule for ∫·dH^{n−1} over ∂K, truncated to the box
/// center ± radius for unbounded bodies.
pub fn boundary_rule(body: &ConvexBody, spec: &QuadratureSpec, center: &[f64], radius: f64) -> Result<Vec<BoundaryNode>> {
    let n = body.dim();
    let rule = GaussLegendre::new(spec.boundary_order)?;
    let panels = spec.boundary_panels;
    let mut out = Vec::new();
    if body.is_whole_space() {
        return Ok(out);
    }
    match (body, n) {
        (ConvexBody::Box { lo, hi }, 1) => {
            if lo[0].is_finite() {
                out.push(BoundaryNode { point: vec![lo[0]], normal: vec![-1.0], weight: 1.0 });
            }
            if hi[0].is_finite() {
                out.push(BoundaryNode { point: vec![hi[0]], normal: vec![1.0], weight: 1.0 });
            }
        }
        (ConvexBody::Polytope(p), 1) => {
            out.push(BoundaryNode { point: p.vertices()[0].clone(), normal: vec![-1.0], weight: 1.0 });
            out.push(BoundaryNode { point: p.vertices()[1].clone(), normal: vec![1.0], weight: 1.0 });
        }
        (ConvexBody::Ball { center: c, radius: r }, 1) => {
            out.push(BoundaryNode { point: vec![c[0] - r], normal: vec![-1.0], weight: 1.0 });
            out.push(BoundaryNode { point: vec![c[0] + r], normal: vec![1.0], weight: 1.0 });
        }
        (ConvexBody::Box { lo, hi }, 2) => {
            let clip = |k: usize| (lo[k].max(center[k] - radius), hi[k].min(center[k] + radius));
            for k in 0..2 {
                let j = 1 - k;
                let (a, b) = clip(j);
                if b <= a {
                    continue;
                }
                for (bound, sign) in [(lo[k], -1.0), (hi[k], 1.0)] {
                    if !bound.is_finite() {
                        continue;
                    }
                    let mut pa = [0.0; 2];
                    let mut pb = [0.0; 2];
                    pa[k] = bound;
                    pb[k] = bound;
                    pa[j] = a;
                    pb[j] = b;
                    let mut normal = [0.0; 2];
                    normal[k] = sign;
                    segment_nodes(&pa, &pb, &normal, &rule, panels, &mut out);
                }
            }
        }
        (ConvexBody::Polytope(p), 2) => {
            for facet in p.facets() {
                let a = &p.vertices()[facet.vertices[0]];
                let b = &p.vertices()[facet.vertices[1]];
                segment_nodes(a, b, &facet.normal, &rule, panels, &mut out);
            }
        }
        (ConvexBody::Ball { center: c, radius: r }, 2) => {
            let m = spec.boundary_order * panels * 4;
            let step = 2.0 * std::f64::consts::PI / m as f64;
            for k in 0..m {
                let a = (k as f64 + 0.5) * step;
                let u = [a.cos(), a.sin()];
                out.push(BoundaryNode { point: vec![c[0] + r * u[0], c[1] + r * u[1]], normal: u.to_vec(), weight: r * step });
            }
        }
        (ConvexBody::Ellipsoid(e), 2) => {
            let root = linalg::spd_sqrt(e.shape());
            let m = spec.boundary_order * panels * 4;
            let step = 2.0 * std::f64::consts::PI / m as f64;
            for k in 0..m {
                let a = (k as f64 + 0.5) * step;
                let u = [a.cos(), a.sin()];
                let du = [-a.sin(), a.cos()];
                let x = linalg::add(e.center(), &linalg::mat_vec(&root, &u));
                let dx = linalg::mat_vec(&root, &du);
                let g = linalg::mat_vec(e.inverse_shape(), &linalg::sub(&x, e.center()));
                let gn = norm(&g);
                out.push(BoundaryNode { point: x, normal: linalg::scale(&g, 1.0 / gn), weight: norm(&dx) * step });
            }
        }
        (ConvexBody::Ball { center: c, radius: r }, 3) => {
            let az = 4 * spec.boundary_order * panels;
            let step = 2.0 * std::f64::consts::PI / az as f64;
            let breaks = crate::quadrature::panel_breaks(-1.0, 1.0, panels, None);
            for (z, wz) in rule.composite(&breaks) {
                let s = (1.0 - z * z).sqrt();
                for k in 0..az {
                    let a = (k as f64 + 0.5) * step;
                    let u = [s * a.cos(), s * a.sin(), z];
                    let point: Vec<f64> = (0..3).map(|i| c[i] + r * u[i]).collect();
                    out.push(BoundaryNode { point, normal: u.to_vec(), weight: r * r * wz * step });
                }
            }
        }
        (b @ (ConvexBody::Polytope(_) | ConvexBody::Box { .. }), 3) => {
            let p = b.as_polytope().ok_or_else(|| Error::Unsupported("unbounded 3D boundary".into()))?;
            for facet in p.facets() {
                let v = &facet.vertices;
                for i in 1..v.len() - 1 {
                    triangle_nodes(
                        &p.vertices()[v[0]],
                        &p.vertices()[v[i]],
                        &p.vertices()[v[i + 1]],
                        &facet.normal,
                        &rule,
                        &mut out,
                    );
                }
            }
        }
        _ => return Err(Error::Unsupported("boundary quadrature for this body".into())),
    }
    Ok(out)
}

fn nu_with(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<DiscreteMeasure> {
    let n = f.dim();
    let mut m = DiscreteMeasure::sphere(n, Provenance::Nu);
    if f.support().is_whole_space() {
        return Ok(m);
    }
    let (center, radius) = if f.support().is_bounded() {
        (vec![0.0; n], f64::INFINITY)
    } else {
        (f.envelope()?.center, effective_radius(f, spec.tail_tol)?)
    };
    let nodes = boundary_rule(f.support(), spec, &center, radius)?;
    let vals: Vec<f64> = nodes.par_iter().map(|b| f.evaluate(&b.point)).collect();
    for (b, v) in nodes.iter().zip(vals) {
        if !v.is_finite() {
            return Err(Error::Divergent("f not evaluable on the boundary".into()));
        }
        m.push(&b.normal, b.weight * v);
    }
    Ok(m)
}

/// ν_f = (n_{K_f})♯(f dH^{n−1}|∂K_f).
pub fn build_nu(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<DiscreteMeasure> {
    f.check_integrable()?;
    nu_with(f, spec)
}

/// Relative change of the total ν-mass when the boundary panels are doubled.
pub fn nu_refinement_change(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<f64> {
    let a = nu_with(f, spec)?.total_mass();
    let fine = QuadratureSpec { boundary_panels: 2 * spec.boundary_panels, ..spec.clone() };
    let b = nu_with(f, &fine)?.total_mass();
    Ok(if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() })
}

/// ∫x dμ_f + ∫x dν_f and the scale ∫|x| dμ_f it is judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteringDefect {
    pub defect: Vec<f64>,
    pub mu_moment: Vec<f64>,
    pub nu_moment: Vec<f64>,
    pub mu_abs_moment: f64,
}

impl CenteringDefect {
    pub fn norm(&self) -> f64 {
        norm(&self.defect)
    }
}

pub fn centering_defect(f: &LogConcaveFn, spec: &QuadratureSpec) -> Result<CenteringDefect> {
    let mu = build_mu(f, spec)?;
    let nu = build_nu(f, spec)?;
    let a = mu.moment();
    let b = nu.moment();
    let defect = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let mut abs = KahanSum::new();
    for (p, w) in mu.atoms() {
        abs.add(w * norm(p));
    }
    Ok(CenteringDefect { defect, mu_moment: a, nu_moment: b, mu_abs_moment: abs.value() })
}

/// True iff ν_f has total mass at most `tol`.
pub fn essential_continuity_test(f: &LogConcaveFn, spec: &QuadratureSpec, tol: f64) -> Result<bool> {
    Ok(build_nu(f, spec)?.total_mass() <= tol)
}

/// Upper bound A·c·|S^{n−1}|·∫₀^∞ s^{n−1}e^{−cs} ds on the ν-mass from the
/// exponential envelope around its anchor.
pub fn nu_mass_bound(f: &LogConcaveFn) -> Result<f64> {
    let env = f.envelope()?;
    let n = f.dim();
    let fact = (1..n).map(|k| k as f64).product::<f64>();
    Ok(env.a_center * env.c * linalg::sphere_area(n) * fact / env.c.powi(n as i32))
}

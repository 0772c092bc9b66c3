//! Convex hulls of finite point sets in dimension 1, 2 and 3, producing
//! polytopes in canonical vertex order with facet (H-)data attached.

use crate::error::{Error, Result};
use crate::linalg::{cross3, dot, norm, sub};

/// A facet: outward unit normal, offset `⟨normal, x⟩ = offset` on the facet,
/// and indices of its vertices (counter-clockwise seen from outside in 3D,
/// the edge endpoints in 2D, the single endpoint in 1D).
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

/// Full-dimensional polytope with extreme-point vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub(crate) dim: usize,
    pub(crate) vertices: Vec<Vec<f64>>,
    pub(crate) facets: Vec<Facet>,
}

fn diameter_scale(points: &[Vec<f64>]) -> f64 {
    let n = points[0].len();
    let mut s: f64 = 0.0;
    for k in 0..n {
        let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        s = s.max(hi - lo);
    }
    s
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns hull indices counter-clockwise starting
/// from the lexicographically smallest point, collinear points dropped.
pub(crate) fn hull2_indices(points: &[[f64; 2]], tol: f64, area_tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    idx.dedup_by(|a, b| {
        (points[*a][0] - points[*b][0]).abs() <= tol && (points[*a][1] - points[*b][1]).abs() <= tol
    });
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && cross2(&points[lower[lower.len() - 2]], &points[lower[lower.len() - 1]], &points[i]) <= area_tol
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && cross2(&points[upper[upper.len() - 2]], &points[upper[upper.len() - 1]], &points[i]) <= area_tol
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl Polytope {
    /// Convex hull of the given points.
    pub fn hull(points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("polytope needs at least one vertex".into()));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidArgument("vertices of mixed dimension".into()));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite vertex coordinate".into()));
        }
        let scale = diameter_scale(points);
        let tol = 1e-9 * scale.max(f64::MIN_POSITIVE);
        if scale <= 0.0 {
            return Err(Error::DegeneratePolytope);
        }
        match n {
            1 => Ok(Self::hull1(points)),
            2 => Self::hull2(points, tol),
            3 => Self::hull3(points, tol),
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    fn hull1(points: &[Vec<f64>]) -> Self {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        Self {
            dim: 1,
            vertices: vec![vec![lo], vec![hi]],
            facets: vec![
                Facet { normal: vec![-1.0], offset: -lo, vertices: vec![0] },
                Facet { normal: vec![1.0], offset: hi, vertices: vec![1] },
            ],
        }
    }

    fn hull2(points: &[Vec<f64>], tol: f64) -> Result<Self> {
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        let scale = diameter_scale(points);
        let h = hull2_indices(&pts, tol, 1e-4 * tol * scale);
        if h.len() < 3 {
            return Err(Error::DegeneratePolytope);
        }
        let vertices: Vec<Vec<f64>> = h.iter().map(|&i| points[i].clone()).collect();
        let m = vertices.len();
        let facets = (0..m)
            .map(|i| {
                let a = &vertices[i];
                let b = &vertices[(i + 1) % m];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = dx.hypot(dy);
                let normal = vec![dy / len, -dx / len];
                let offset = dot(&normal, a);
                Facet { normal, offset, vertices: vec![i, (i + 1) % m] }
            })
            .collect();
        Ok(Self { dim: 2, vertices, facets })
    }

    fn hull3(points: &[Vec<f64>], tol: f64) -> Result<Self> {
        // deduplicate input points first to keep the facet search small
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if !pts.iter().any(|q| crate::linalg::dist(p, q) <= tol) {
                pts.push(p.clone());
            }
        }
        let m = pts.len();
        let scale = diameter_scale(&pts);
        if m < 4 {
            return Err(Error::DegeneratePolytope);
        }
        let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let c = cross3(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                    let len = norm(&c);
                    if len <= tol * scale {
                        continue;
                    }
                    let nrm: Vec<f64> = c.iter().map(|x| x / len).collect();
                    let off = dot(&nrm, &pts[i]);
                    let mut above = false;
                    let mut below = false;
                    for p in &pts {
                        let d = dot(&nrm, p) - off;
                        if d > tol {
                            above = true;
                        } else if d < -tol {
                            below = true;
                        }
                        if above && below {
                            break;
                        }
                    }
                    let candidate = match (above, below) {
                        (false, true) => Some((nrm, off)),
                        (true, false) => Some((nrm.iter().map(|x| -x).collect(), -off)),
                        (false, false) => return Err(Error::DegeneratePolytope),
                        _ => None,
                    };
                    if let Some((nv, o)) = candidate {
                        let dup = planes.iter().any(|(q, qo)| {
                            crate::linalg::dist(q, &nv) <= 1e-6 && (qo - o).abs() <= 1e3 * tol
                        });
                        if !dup {
                            planes.push((nv, o));
                        }
                    }
                }
            }
        }
        if planes.len() < 4 {
            return Err(Error::DegeneratePolytope);
        }
        // facet polygons in plane coordinates
        let mut facet_pts: Vec<(Vec<f64>, f64, Vec<usize>)> = Vec::new();
        for (nv, off) in &planes {
            let on: Vec<usize> = (0..m).filter(|&i| (dot(nv, &pts[i]) - off).abs() <= tol).collect();
            let (u, w) = plane_basis(nv);
            let proj: Vec<[f64; 2]> = on.iter().map(|&i| [dot(&u, &pts[i]), dot(&w, &pts[i])]).collect();
            let h = hull2_indices(&proj, tol, tol * scale);
            if h.len() < 3 {
                continue;
            }
            let ids: Vec<usize> = h.iter().map(|&r| on[r]).collect();
            facet_pts.push((nv.clone(), *off, ids));
        }
        // canonical vertex order: lexicographic
        let mut used: Vec<usize> = facet_pts.iter().flat_map(|f| f.2.iter().copied()).collect();
        used.sort_by(|&a, &b| lex_cmp(&pts[a], &pts[b]));
        used.dedup();
        let mut remap = vec![usize::MAX; m];
        for (new, &old) in used.iter().enumerate() {
            remap[old] = new;
        }
        let vertices: Vec<Vec<f64>> = used.iter().map(|&i| pts[i].clone()).collect();
        let mut facets: Vec<Facet> = facet_pts
            .into_iter()
            .map(|(normal, offset, ids)| {
                let mut v: Vec<usize> = ids.iter().map(|&i| remap[i]).collect();
                // rotate so the smallest index comes first
                let p = v.iter().enumerate().min_by_key(|(_, &x)| x).map(|(i, _)| i).unwrap_or(0);
                v.rotate_left(p);
                Facet { normal, offset, vertices: v }
            })
            .collect();
        facets.sort_by(|a, b| lex_cmp(&a.normal, &b.normal));
        Ok(Self { dim: 3, vertices, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// (n−1)-dimensional measure of a facet (counting measure in 1D).
    pub fn facet_area(&self, f: &Facet) -> f64 {
        match self.dim {
            1 => 1.0,
            2 => crate::linalg::dist(&self.vertices[f.vertices[0]], &self.vertices[f.vertices[1]]),
            _ => {
                let v0 = &self.vertices[f.vertices[0]];
                let mut a = [0.0; 3];
                for w in f.vertices[1..].windows(2) {
                    let c = cross3(&sub(&self.vertices[w[0]], v0), &sub(&self.vertices[w[1]], v0));
                    for k in 0..3 {
                        a[k] += c[k];
                    }
                }
                0.5 * dot(&a, &f.normal).abs()
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            2 => {
                let m = self.vertices.len();
                let mut s = 0.0;
                for i in 0..m {
                    let a = &self.vertices[i];
                    let b = &self.vertices[(i + 1) % m];
                    s += a[0] * b[1] - a[1] * b[0];
                }
                0.5 * s
            }
            _ => {
                let c = self.centroid_of_vertices();
                self.facets
                    .iter()
                    .map(|f| (f.offset - dot(&f.normal, &c)) * self.facet_area(f) / 3.0)
                    .sum()
            }
        }
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| self.facet_area(f)).sum()
    }

    pub fn centroid_of_vertices(&self) -> Vec<f64> {
        let m = self.vertices.len() as f64;
        (0..self.dim)
            .map(|k| self.vertices.iter().map(|v| v[k]).sum::<f64>() / m)
            .collect()
    }

    /// Edges of a 3D polytope as (vertex a, vertex b, facet i, facet j).
    pub fn edges3(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for (fi, f) in self.facets.iter().enumerate() {
            let k = f.vertices.len();
            for e in 0..k {
                let (a, b) = (f.vertices[e], f.vertices[(e + 1) % k]);
                if a < b {
                    let fj = self.facets.iter().position(|g| {
                        let kk = g.vertices.len();
                        (0..kk).any(|q| g.vertices[q] == b && g.vertices[(q + 1) % kk] == a)
                    });
                    if let Some(fj) = fj {
                        out.push((a, b, fi, fj));
                    }
                }
            }
        }
        out
    }

    /// Integrated mean curvature ½ Σ_e ℓ_e·(angle between adjacent normals);
    /// the r² coefficient of |P + rB| in 3D.
    pub fn mean_width_term(&self) -> f64 {
        self.edges3()
            .iter()
            .map(|&(a, b, fi, fj)| {
                let l = crate::linalg::dist(&self.vertices[a], &self.vertices[b]);
                let c = dot(&self.facets[fi].normal, &self.facets[fj].normal).clamp(-1.0, 1.0);
                0.5 * l * c.acos()
            })
            .sum()
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(v, theta))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn translate(&self, a: &[f64]) -> Self {
        let vertices = self.vertices.iter().map(|v| crate::linalg::add(v, a)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { offset: f.offset + dot(&f.normal, a), ..f.clone() })
            .collect();
        Self { dim: self.dim, vertices, facets }
    }

    pub fn scale(&self, t: f64) -> Self {
        let vertices = self.vertices.iter().map(|v| crate::linalg::scale(v, t)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Facet { offset: f.offset * t, ..f.clone() })
            .collect();
        Self { dim: self.dim, vertices, facets }
    }

    /// Signed violation max_i ⟨n_i, x⟩ − b_i (≤ 0 inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| dot(&f.normal, x) - f.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Euclidean distance from x to the polytope (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        if self.violation(x) <= 0.0 {
            return 0.0;
        }
        match self.dim {
            1 => (self.vertices[0][0] - x[0]).max(x[0] - self.vertices[1][0]).max(0.0),
            2 => self
                .facets
                .iter()
                .map(|f| segment_distance(x, &self.vertices[f.vertices[0]], &self.vertices[f.vertices[1]]))
                .fold(f64::INFINITY, f64::min),
            _ => self
                .facets
                .iter()
                .map(|f| self.facet_distance3(f, x))
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn facet_distance3(&self, f: &Facet, x: &[f64]) -> f64 {
        let d = dot(&f.normal, x) - f.offset;
        let p: Vec<f64> = (0..3).map(|k| x[k] - d * f.normal[k]).collect();
        let k = f.vertices.len();
        let inside = (0..k).all(|e| {
            let a = &self.vertices[f.vertices[e]];
            let b = &self.vertices[f.vertices[(e + 1) % k]];
            let c = cross3(&sub(b, a), &sub(&p, a));
            dot(&c, &f.normal) >= -1e-14
        });
        if inside {
            return d.abs();
        }
        (0..k)
            .map(|e| segment_distance(x, &self.vertices[f.vertices[e]], &self.vertices[f.vertices[(e + 1) % k]]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Range of coordinate `k` over the slice of the polytope where the first
    /// k coordinates equal `prefix`.
    pub fn section(&self, prefix: &[f64], k: usize) -> Option<(f64, f64)> {
        let n = self.dim;
        if k == 0 {
            let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            return Some((lo, hi));
        }
        if k == n - 1 {
            // line {prefix} × ℝ against every half-space
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for f in &self.facets {
                let rest: f64 = f.offset - (0..k).map(|i| f.normal[i] * prefix[i]).sum::<f64>();
                let a = f.normal[k];
                if a.abs() <= 1e-15 {
                    if rest < -1e-12 * (1.0 + f.offset.abs()) {
                        return None;
                    }
                } else if a > 0.0 {
                    hi = hi.min(rest / a);
                } else {
                    lo = lo.max(rest / a);
                }
            }
            return (hi >= lo).then_some((lo, hi));
        }
        // n = 3, k = 1: slice by the plane x0 = prefix[0]
        let a = prefix[0];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.vertices {
            if (v[0] - a).abs() <= 1e-14 {
                lo = lo.min(v[1]);
                hi = hi.max(v[1]);
            }
        }
        for (va, vb, _, _) in self.edges3() {
            let (p, q) = (&self.vertices[va], &self.vertices[vb]);
            if (p[0] - a) * (q[0] - a) < 0.0 {
                let s = (a - p[0]) / (q[0] - p[0]);
                let y = p[1] + s * (q[1] - p[1]);
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        (hi >= lo).then_some((lo, hi))
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Orthonormal basis (u, w) of the plane orthogonal to `n`, oriented so that
/// (u, w, n) is right-handed.
pub(crate) fn plane_basis(n: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross3(&a, n);
    let lu = norm(&u);
    let u: Vec<f64> = u.iter().map(|x| x / lu).collect();
    let w = cross3(n, &u).to_vec();
    (u, w)
}

pub(crate) fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ax = sub(x, a);
    let l2 = dot(&ab, &ab);
    let s = if l2 > 0.0 { (dot(&ax, &ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let p: Vec<f64> = a.iter().zip(&ab).map(|(ai, di)| ai + s * di).collect();
    crate::linalg::dist(x, &p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_hull_drops_interior_and_collinear_points() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.3, 0.4],
        ];
        let p = Polytope::hull(&pts).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.vertices()[0], vec![0.0, 0.0]);
        assert!((p.volume() - 1.0).abs() < 1e-15);
        assert!((p.surface_area() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn cube_hull_has_six_square_facets() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(vec![(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64]);
        }
        pts.push(vec![0.5, 0.5, 0.5]);
        let p = Polytope::hull(&pts).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(p.facets().len(), 6);
        for f in p.facets() {
            assert_eq!(f.vertices.len(), 4);
            assert!((p.facet_area(f) - 1.0).abs() < 1e-12);
        }
        assert!((p.volume() - 1.0).abs() < 1e-12);
        assert_eq!(p.edges3().len(), 12);
        // each edge has dihedral normal angle π/2
        assert!((p.mean_width_term() - 12.0 * 0.5 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn coplanar_points_are_degenerate() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert_eq!(Polytope::hull(&pts), Err(Error::DegeneratePolytope));
        let line = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(Polytope::hull(&line), Err(Error::DegeneratePolytope));
    }

    #[test]
    fn sections_of_triangle_and_tetrahedron() {
        let t = Polytope::hull(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let (lo, hi) = t.section(&[0.5], 1).unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 1.5).abs() < 1e-14);
        let tet = Polytope::hull(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let (lo, hi) = tet.section(&[0.25], 1).unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 0.75).abs() < 1e-14);
        let (lo, hi) = tet.section(&[0.25, 0.25], 2).unwrap();
        assert!(lo.abs() < 1e-14 && (hi - 0.5).abs() < 1e-14);
        assert!((tet.volume() - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn distances() {
        let sq = Polytope::hull(&[vec![-1.0, -1.0], vec![1.0, -1.0], vec![1.0, 1.0], vec![-1.0, 1.0]]).unwrap();
        assert_eq!(sq.distance(&[0.2, 0.3]), 0.0);
        assert!((sq.distance(&[4.0, 5.0]) - 5.0).abs() < 1e-14);
        assert!((sq.distance(&[0.0, 3.0]) - 2.0).abs() < 1e-14);
    }
}

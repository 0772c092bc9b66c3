//! Potentials sampled on uniform lattices, with `f64::INFINITY` as the
//! sentinel for +∞ (extended-real arithmetic: ∞ + finite = ∞).

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;

/// Uniform lattice: `origin + i·spacing` for `i < counts` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Lattice {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let n = origin.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        if spacing.len() != n || counts.len() != n {
            return Err(Error::InvalidArgument("lattice header fields disagree in dimension".into()));
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) || counts.iter().any(|&c| c < 2) {
            return Err(Error::InvalidArgument("lattice needs positive spacing and ≥ 2 nodes per axis".into()));
        }
        Ok(Self { origin, spacing, counts })
    }

    /// Lattice with `count` nodes per axis spanning the box [lo, hi].
    pub fn spanning(lo: &[f64], hi: &[f64], count: usize) -> Result<Self> {
        let spacing = lo.iter().zip(hi).map(|(a, b)| (b - a) / (count - 1) as f64).collect();
        Self::new(lo.to_vec(), spacing, vec![count; lo.len()])
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn upper(&self, k: usize) -> f64 {
        self.origin[k] + (self.counts[k] - 1) as f64 * self.spacing[k]
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        (0..self.counts[k]).map(|i| self.origin[k] + i as f64 * self.spacing[k]).collect()
    }

    /// Row-major flat index (last axis fastest).
    pub fn flat(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for k in 0..self.dim() {
            f = f * self.counts[k] + idx[k];
        }
        f
    }

    pub fn multi(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.counts[k];
            flat /= self.counts[k];
        }
        out
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let m = self.multi(flat);
        (0..self.dim()).map(|k| self.origin[k] + m[k] as f64 * self.spacing[k]).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }
}

/// Extended-real values on a lattice, interpolated multilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl GridPotential {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidArgument(format!(
                "grid payload has {} values, lattice needs {}",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::InvalidArgument("grid values must lie in (−∞, +∞]".into()));
        }
        if values.iter().all(|v| v.is_infinite()) {
            return Err(Error::EmptyDomain);
        }
        Ok(Self { lattice, values })
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Multilinear interpolation; +∞ outside the lattice or when any corner
    /// of the containing cell is +∞.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for k in 0..n {
            let u = (x[k] - self.lattice.origin[k]) / self.lattice.spacing[k];
            let last = (self.lattice.counts[k] - 1) as f64;
            if !(u >= -1e-9 && u <= last + 1e-9) {
                return f64::INFINITY;
            }
            let u = u.clamp(0.0, last);
            let i = (u.floor() as usize).min(self.lattice.counts[k] - 2);
            base[k] = i;
            frac[k] = u - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = [0usize; MAX_DIM];
            for k in 0..n {
                let bit = (corner >> k) & 1;
                idx[k] = base[k] + bit;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            let v = self.values[self.lattice.flat(&idx[..n])];
            if v.is_infinite() {
                if w > 0.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            acc += w * v;
        }
        acc
    }

    /// Central differences with step equal to the spacing; a kink is flagged
    /// when the one-sided slopes disagree by more than the neighbouring slope
    /// changes suggest for a smooth function.
    pub fn gradient(&self, x: &[f64]) -> Result<(Vec<f64>, bool)> {
        let n = self.dim();
        let mut g = vec![0.0; n];
        let mut kink = false;
        let v0 = self.eval(x);
        if v0.is_infinite() {
            return Err(Error::OutsideDomain);
        }
        for k in 0..n {
            let h = self.lattice.spacing[k];
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let (vp, vm) = (self.eval(&xp), self.eval(&xm));
            if vp.is_infinite() || vm.is_infinite() {
                return Err(Error::OutsideDomain);
            }
            let dp = (vp - v0) / h;
            let dm = (v0 - vm) / h;
            g[k] = 0.5 * (dp + dm);
            let mut xpp = xp.clone();
            xpp[k] += h;
            let mut xmm = xm.clone();
            xmm[k] -= h;
            let (vpp, vmm) = (self.eval(&xpp), self.eval(&xmm));
            let curv = if vpp.is_finite() && vmm.is_finite() {
                0.5 * ((vpp - vp) / h - dp).abs() + 0.5 * (dm - (vm - vmm) / h).abs()
            } else {
                f64::INFINITY
            };
            if (dp - dm).abs() > 2.0 * curv + 1e-9 * (1.0 + dp.abs() + dm.abs()) {
                kink = true;
                g[k] = if dp.abs() <= dm.abs() { dp } else { dm };
            }
        }
        Ok((g, kink))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// t·φ(x/t): coordinates and values scale by t.
    pub fn dilate(&self, t: f64) -> Self {
        let lattice = Lattice {
            origin: self.lattice.origin.iter().map(|v| v * t).collect(),
            spacing: self.lattice.spacing.iter().map(|v| v * t).collect(),
            counts: self.lattice.counts.clone(),
        };
        Self { lattice, values: self.values.iter().map(|v| v * t).collect() }
    }

    /// Closure of the finite region: interval in 1D, hull of finite nodes in
    /// 2D, bounding box of finite nodes in 3D.
    pub fn finite_region(&self) -> Result<ConvexBody> {
        let pts: Vec<Vec<f64>> = (0..self.lattice.len())
            .filter(|&i| self.values[i].is_finite())
            .map(|i| self.lattice.node(i))
            .collect();
        if pts.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let n = self.dim();
        if n == 2 {
            if let Ok(p) = ConvexBody::polytope(&pts) {
                return Ok(p);
            }
        }
        let lo: Vec<f64> = (0..n).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..n).map(|k| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        ConvexBody::axis_box(lo, hi)
    }

    /// Checks that along every lattice line the finite values form one
    /// contiguous run and have nondecreasing forward differences.
    pub fn is_discretely_convex(&self, tol: f64) -> bool {
        let n = self.dim();
        let l = &self.lattice;
        for axis in 0..n {
            let stride: usize = l.counts[axis + 1..n].iter().product();
            for start in 0..l.len() {
                if l.multi(start)[axis] != 0 {
                    continue;
                }
                let line: Vec<f64> = (0..l.counts[axis]).map(|i| self.values[start + i * stride]).collect();
                let finite: Vec<usize> = (0..line.len()).filter(|&i| line[i].is_finite()).collect();
                if finite.is_empty() {
                    continue;
                }
                if finite.last().unwrap() - finite[0] + 1 != finite.len() {
                    return false;
                }
                for w in finite.windows(3) {
                    let d1 = line[w[1]] - line[w[0]];
                    let d2 = line[w[2]] - line[w[1]];
                    if d2 < d1 - tol * (1.0 + d1.abs()) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Discrete Legendre transform along one line: for each query slope y,
/// sup_i (x_i·y − v_i), skipping +∞ values. O(N·M).
pub(crate) fn conjugate_line(xs: &[f64], vals: &[f64], ys: &[f64], out: &mut [f64]) {
    for (o, &y) in out.iter_mut().zip(ys) {
        let mut best = f64::NEG_INFINITY;
        for (x, v) in xs.iter().zip(vals) {
            if v.is_finite() {
                let c = x * y - v;
                if c > best {
                    best = c;
                }
            }
        }
        *o = if best == f64::NEG_INFINITY { f64::INFINITY } else { best };
    }
}

/// Conjugate of a grid potential evaluated on a query lattice by per-axis
/// factorization: φ*(y) = sup_{x₁} [x₁y₁ + sup_{x₂} (x₂y₂ − …)].
pub fn grid_conjugate(phi: &GridPotential, query: &Lattice) -> Result<GridPotential> {
    let n = phi.dim();
    if query.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: query.dim() });
    }
    // work array indexed by (y_0..y_{k-1}, x_k..x_{n-1}); process axes from last to first
    let mut counts: Vec<usize> = phi.lattice.counts.clone();
    let mut data = phi.values.iter().map(|v| if v.is_finite() { *v } else { f64::INFINITY }).collect::<Vec<_>>();
    for axis in (0..n).rev() {
        let xs = phi.lattice.axis(axis);
        let ys = query.axis(axis);
        let mut new_counts = counts.clone();
        new_counts[axis] = ys.len();
        let stride: usize = counts[axis + 1..].iter().product();
        let outer: usize = counts[..axis].iter().product();
        let mut out = vec![f64::INFINITY; outer * ys.len() * stride];
        let mut line = vec![0.0; xs.len()];
        let mut res = vec![0.0; ys.len()];
        for o in 0..outer {
            for s in 0..stride {
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[(o * xs.len() + i) * stride + s];
                }
                conjugate_line(&xs, &line, &ys, &mut res);
                for (j, r) in res.iter().enumerate() {
                    out[(o * ys.len() + j) * stride + s] = *r;
                }
            }
        }
        // from the second axis on the line values are negated conjugates:
        // sup_x (x y − φ) = sup_x (x y − (−ψ)) with ψ the partial result
        data = out;
        counts = new_counts;
        if axis > 0 {
            for v in data.iter_mut() {
                *v = -*v;
            }
        }
    }
    GridPotential::new(query.clone(), data)
}

use crate::bodies::ConvexBody;
use crate::convex::{Lattice, LogConcaveFn};
use crate::error::{check_dim, Error, Result};
use crate::linalg::KahanSum;

/// Width of the zero frame required around the support of a field.
pub const MARGIN: usize = 2;

/// Nonnegative samples on a uniform lattice in dimension 1 or 2, vanishing
/// on a frame of [`MARGIN`] nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    lattice: Lattice,
    values: Vec<f64>,
}

fn in_margin(lattice: &Lattice, flat: usize) -> bool {
    let m = lattice.multi(flat);
    (0..lattice.dim()).any(|k| m[k] < MARGIN || m[k] + MARGIN >= lattice.counts[k])
}

impl GridField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        let n = lattice.dim();
        if n > 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        if values.len() != lattice.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, lattice needs {}",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("field values must be finite and nonnegative".into()));
        }
        if lattice.counts.iter().any(|&c| c < 2 * MARGIN + 1) {
            return Err(Error::InvalidArgument("lattice too small for the zero margin".into()));
        }
        if (0..values.len()).any(|i| values[i] != 0.0 && in_margin(&lattice, i)) {
            return Err(Error::InvalidArgument(format!("support must stay {MARGIN} cells inside the lattice")));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroFunction);
        }
        Ok(Self { lattice, values })
    }

    /// Samples f at the nodes of `count` points per axis spanning [lo, hi];
    /// the margin frame is set to zero.
    pub fn sample(f: &LogConcaveFn, lo: &[f64], hi: &[f64], count: usize) -> Result<Self> {
        check_dim(f.dim(), lo.len())?;
        let lattice = Lattice::spanning(lo, hi, count)?;
        let values = (0..lattice.len())
            .map(|i| if in_margin(&lattice, i) { 0.0 } else { f.evaluate(&lattice.node(i)) })
            .collect();
        Self::new(lattice, values)
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive value.
    pub fn min_positive(&self) -> f64 {
        self.values.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min)
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.lattice.counts[1] + j]
    }

    /// Whether −log f is convex along every lattice row and column, with a
    /// contiguous positive set on each line.
    pub fn is_log_concave(&self, tol: f64) -> bool {
        let line_ok = |vals: &[f64]| {
            let pos: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.0).collect();
            if pos.is_empty() {
                return true;
            }
            let (a, b) = (pos[0], pos[pos.len() - 1]);
            if b - a + 1 != pos.len() {
                return false;
            }
            (a + 1..b).all(|i| {
                let d2 = -vals[i - 1].ln() + 2.0 * vals[i].ln() - vals[i + 1].ln();
                d2 >= -tol
            })
        };
        match self.dim() {
            1 => line_ok(&self.values),
            _ => {
                let (n0, n1) = (self.lattice.counts[0], self.lattice.counts[1]);
                let rows = (0..n0).all(|i| line_ok(&self.values[i * n1..(i + 1) * n1]));
                rows && (0..n1).all(|j| {
                    let col: Vec<f64> = (0..n0).map(|i| self.at(i, j)).collect();
                    line_ok(&col)
                })
            }
        }
    }
}

fn require_origin(l: &ConvexBody) -> Result<()> {
    if !l.origin_interior() {
        return Err(Error::OriginNotInterior);
    }
    Ok(())
}

/// Σ h_L(−D⁺f)·hⁿ over the lattice, with forward differences D⁺.
pub fn tv_grid(field: &GridField, l: &ConvexBody) -> Result<f64> {
    check_dim(field.dim(), l.dim())?;
    require_origin(l)?;
    let lat = &field.lattice;
    let mut s = KahanSum::new();
    match field.dim() {
        1 => {
            let v = &field.values;
            for i in 0..v.len() - 1 {
                // h_L(−Δf/h)·h = h_L(f_i − f_{i+1})
                s.add(l.support(&[v[i] - v[i + 1]]));
            }
        }
        _ => {
            let (n0, n1) = (lat.counts[0], lat.counts[1]);
            let (h0, h1) = (lat.spacing[0], lat.spacing[1]);
            let cell = h0 * h1;
            for i in 0..n0 - 1 {
                for j in 0..n1 - 1 {
                    let f = field.at(i, j);
                    let d = [(field.at(i + 1, j) - f) / h0, (field.at(i, j + 1) - f) / h1];
                    if d[0] != 0.0 || d[1] != 0.0 {
                        s.add(cell * l.support(&[-d[0], -d[1]]));
                    }
                }
            }
        }
    }
    Ok(s.value())
}

/// Crossing points of the piecewise linear interpolant with level s: for
/// every lattice line, the two ends of the interval where it is ≥ s.
pub(crate) fn level_points(field: &GridField, s: f64) -> Vec<Vec<f64>> {
    let lat = &field.lattice;
    let line = |vals: &mut dyn Iterator<Item = f64>, coord: &dyn Fn(f64) -> Vec<f64>, out: &mut Vec<Vec<f64>>| {
        let vals: Vec<f64> = vals.collect();
        let above: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= s).collect();
        let (Some(&a), Some(&b)) = (above.first(), above.last()) else {
            return;
        };
        // entries are inside the margin, so a − 1 and b + 1 exist
        let left = a as f64 - (vals[a] - s) / (vals[a] - vals[a - 1]);
        let right = b as f64 + (vals[b] - s) / (vals[b] - vals[b + 1]);
        out.push(coord(left));
        out.push(coord(right));
    };
    let mut out = Vec::new();
    match field.dim() {
        1 => {
            let c = |u: f64| vec![lat.origin[0] + u * lat.spacing[0]];
            line(&mut field.values.iter().copied(), &c, &mut out);
        }
        _ => {
            let (n0, n1) = (lat.counts[0], lat.counts[1]);
            for i in 0..n0 {
                let x0 = lat.origin[0] + i as f64 * lat.spacing[0];
                let c = |u: f64| vec![x0, lat.origin[1] + u * lat.spacing[1]];
                line(&mut (0..n1).map(|j| field.at(i, j)), &c, &mut out);
            }
            for j in 0..n1 {
                let x1 = lat.origin[1] + j as f64 * lat.spacing[1];
                let c = |u: f64| vec![lat.origin[0] + u * lat.spacing[0], x1];
                line(&mut (0..n0).map(|i| field.at(i, j)), &c, &mut out);
            }
        }
    }
    out
}

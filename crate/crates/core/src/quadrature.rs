//! Quadrature rules: Gauss–Legendre nodes, composite tensor rules over
//! body-adapted slices, and adaptive Gauss–Kronrod integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::{KahanSum, MAX_DIM};

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of P_n found by Newton iteration from the
    /// Chebyshev-like initial guesses; weights are 2 / ((1 - x²) P_n'(x)²).
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidArgument("Gauss-Legendre order must be ≥ 1".into()));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = KahanSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }

    /// Nodes and weights of the composite rule over the given breakpoints
    /// (each consecutive pair is one panel).
    pub fn composite(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.order() * breaks.len().saturating_sub(1));
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * wt));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// `panels` equal panels over [a, b], plus an extra break at `split` when it
/// falls strictly inside.
pub fn panel_breaks(a: f64, b: f64, panels: usize, split: Option<f64>) -> Vec<f64> {
    let panels = panels.max(1);
    match split {
        Some(c) if c > a && c < b => {
            // distribute panels proportionally on both sides of the split
            let left = (((c - a) / (b - a)) * panels as f64).round().max(1.0) as usize;
            let right = panels.saturating_sub(left).max(1);
            let mut v: Vec<f64> = (0..left).map(|k| a + (c - a) * k as f64 / left as f64).collect();
            v.extend((0..=right).map(|k| c + (b - c) * k as f64 / right as f64));
            v
        }
        _ => (0..=panels)
            .map(|k| a + (b - a) * k as f64 / panels as f64)
            .collect(),
    }
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let v = f(c - x) + f(c + x);
        rk += WGK[j] * v;
        if j % 2 == 1 {
            rg += WG[j / 2] * v;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.a == other.a
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration on [a, b], with
/// optional interior breakpoints used to seed the subdivision.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Estimate {
    if !(b > a) {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&c| c > a && c < b).collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let mut converged = false;
    while heap.len() < max_segments {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(worst);
            converged = err <= 1e3 * abs_tol.max(rel_tol * total.abs());
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    if !converged && err <= abs_tol.max(rel_tol * total.abs()) {
        converged = true;
    }
    // final value summed in left-to-right order for reproducibility
    let mut segs = heap.into_vec();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut acc = KahanSum::new();
    let mut eacc = 0.0;
    for s in &segs {
        acc.add(s.value);
        eacc += s.error;
    }
    Estimate { value: acc.value(), error: eacc, converged }
}

/// Describes an integration region slice by slice: for coordinate `k` and the
/// already-fixed leading coordinates `prefix` (length k), the interval of
/// admissible values of `x_k`, or `None` if the slice is empty. The interval
/// may over-approximate the region; the integrand must vanish outside it.
pub trait Sections: Sync {
    fn dim(&self) -> usize;
    fn section(&self, prefix: &[f64], k: usize) -> Option<(f64, f64)>;
    /// Preferred split point per axis (kinks of the integrand), if any.
    fn split(&self, _k: usize) -> Option<f64> {
        None
    }
    /// Break points for adaptive integration along axis k.
    fn breaks(&self, k: usize) -> Vec<f64> {
        self.split(k).into_iter().collect()
    }
}

/// Iterated adaptive integration of `f` over the region.
pub fn integrate_adaptive<S: Sections + ?Sized, F: Fn(&[f64]) -> f64>(
    region: &S,
    f: &F,
    scale: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    let n = region.dim();
    let abs_tol = rel_tol * scale.abs().max(f64::MIN_POSITIVE);
    let mut failed = false;
    let est = nested(region, f, [0.0; MAX_DIM], 0, n, abs_tol, rel_tol, &mut failed);
    Ok(Estimate { converged: est.converged && !failed, ..est })
}

#[allow(clippy::too_many_arguments)]
fn nested<S: Sections + ?Sized, F: Fn(&[f64]) -> f64>(
    region: &S,
    f: &F,
    prefix: [f64; MAX_DIM],
    k: usize,
    n: usize,
    abs_tol: f64,
    rel_tol: f64,
    failed: &mut bool,
) -> Estimate {
    let Some((lo, hi)) = region.section(&prefix[..k], k) else {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    };
    if !(hi > lo) {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let breaks = region.breaks(k);
    if k + 1 == n {
        let mut x = prefix;
        adaptive(
            |t| {
                x[k] = t;
                f(&x[..n])
            },
            lo,
            hi,
            &breaks,
            abs_tol,
            rel_tol,
            4000,
        )
    } else {
        // inner tolerance scaled so that the accumulated slice error stays below abs_tol
        let inner_abs = 0.1 * abs_tol / (hi - lo);
        let mut inner_failed = false;
        let est = adaptive(
            |t| {
                let mut x = prefix;
                x[k] = t;
                let e = nested(region, f, x, k + 1, n, inner_abs, rel_tol * 0.1, &mut inner_failed);
                e.value
            },
            lo,
            hi,
            &breaks,
            abs_tol,
            rel_tol,
            2000,
        );
        if inner_failed {
            *failed = true;
        }
        est
    }
}

/// Tensor composite Gauss–Legendre nodes adapted slice by slice to the
/// region. Calls `visit(x, w)` for every node in a fixed order.
pub fn tensor_nodes<S: Sections + ?Sized, V: FnMut(&[f64], f64)>(
    region: &S,
    rule: &GaussLegendre,
    panels: usize,
    visit: &mut V,
) {
    let n = region.dim();
    tensor_rec(region, rule, panels, [0.0; MAX_DIM], 1.0, 0, n, visit);
}

#[allow(clippy::too_many_arguments)]
fn tensor_rec<S: Sections + ?Sized, V: FnMut(&[f64], f64)>(
    region: &S,
    rule: &GaussLegendre,
    panels: usize,
    prefix: [f64; MAX_DIM],
    weight: f64,
    k: usize,
    n: usize,
    visit: &mut V,
) {
    let Some((lo, hi)) = region.section(&prefix[..k], k) else { return };
    if !(hi > lo) {
        return;
    }
    let breaks = panel_breaks(lo, hi, panels, region.split(k));
    for (t, w) in rule.composite(&breaks) {
        let mut x = prefix;
        x[k] = t;
        if k + 1 == n {
            visit(&x[..n], weight * w);
        } else {
            tensor_rec(region, rule, panels, x, weight * w, k + 1, n, visit);
        }
    }
}

/// Axis-aligned box region.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub center: Option<Vec<f64>>,
}

impl Sections for BoxRegion {
    fn dim(&self) -> usize {
        self.lo.len()
    }
    fn section(&self, _prefix: &[f64], k: usize) -> Option<(f64, f64)> {
        (self.hi[k] > self.lo[k]).then(|| (self.lo[k], self.hi[k]))
    }
    fn split(&self, k: usize) -> Option<f64> {
        self.center.as_ref().map(|c| c[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8).unwrap();
        // degree 15 polynomial integrates exactly
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert_relative_eq!(v, 2f64.powi(16) / 16.0, max_relative = 1e-13);
        let s: f64 = rule.weights().iter().sum();
        assert_relative_eq!(s, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn odd_order_has_zero_node() {
        let rule = GaussLegendre::new(5).unwrap();
        assert_eq!(rule.nodes()[2], 0.0);
        assert_relative_eq!(rule.integrate(-1.0, 1.0, |x| x * x), 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks_and_jumps() {
        let e = adaptive(|x: f64| x.abs(), -1.0, 2.0, &[], 1e-14, 1e-13, 2000);
        assert_relative_eq!(e.value, 2.5, max_relative = 1e-12);
        let e = adaptive(|x: f64| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, &[], 1e-13, 1e-13, 4000);
        assert!(e.converged);
        assert!((e.value - 0.3).abs() < 1e-11);
    }

    #[test]
    fn nested_gaussian_on_box() {
        let r = BoxRegion { lo: vec![-12.0, -12.0], hi: vec![12.0, 12.0], center: Some(vec![0.0, 0.0]) };
        let e = integrate_adaptive(&r, &|x: &[f64]| (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 6.0, 1e-12).unwrap();
        assert_relative_eq!(e.value, 2.0 * std::f64::consts::PI, max_relative = 1e-11);
    }

    #[test]
    fn tensor_rule_weights_sum_to_volume() {
        let r = BoxRegion { lo: vec![0.0, -1.0], hi: vec![2.0, 3.0], center: None };
        let rule = GaussLegendre::new(4).unwrap();
        let mut total = 0.0;
        tensor_nodes(&r, &rule, 3, &mut |_, w| total += w);
        assert_relative_eq!(total, 8.0, max_relative = 1e-13);
    }
}

//! The first variation δ(f,g) = lim_{t→0⁺} (∫f⋆(t·g) − ∫f)/t, computed from
//! the integral curve, from the measures μ_f, ν_f, and from level sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bodies::ConvexBody;
use crate::convex::{
    integrate, integrate_within, sup_convolve, support_function_of_function, truncation_radius, LogConcaveFn,
    QuadratureSpec, SupportProvenance,
};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, norm};
use crate::measures::{build_mu, build_nu};
use crate::tv::{level_set, perimeter, LevelGrid};

/// Strictly decreasing positive sequence of sup-convolution parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    ts: Vec<f64>,
}

impl Schedule {
    pub fn new(ts: Vec<f64>) -> Result<Self> {
        if ts.len() < 2 {
            return Err(Error::InvalidArgument("schedule needs at least two values".into()));
        }
        if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) || ts.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("schedule must be strictly decreasing and positive".into()));
        }
        Ok(Self { ts })
    }

    /// t_k = 2^{−k}, k = first..=last.
    pub fn dyadic(first: usize, last: usize) -> Result<Self> {
        Self::new((first..=last).map(|k| 0.5f64.powi(k as i32)).collect())
    }

    /// t_k = 2^{−k}, k = 0..=depth.
    pub fn geometric(depth: usize) -> Result<Self> {
        Self::dyadic(0, depth)
    }

    /// Deeper schedule used for the tighter main-theorem tolerance.
    pub fn refined() -> Self {
        Self::geometric(16).expect("valid schedule")
    }

    /// Schedule for pointwise quotients at a fixed x.
    pub fn pointwise() -> Self {
        Self::dyadic(4, 20).expect("valid schedule")
    }

    pub fn ts(&self) -> &[f64] {
        &self.ts
    }

    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Self::geometric(12).expect("valid schedule")
    }
}

/// One sample I(t) = ∫f⋆(t·g) of the integral curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub t: f64,
    pub value: f64,
    /// Absolute error estimate of the quadrature.
    pub error: f64,
    /// Radius of the truncation box (∞ when the integral was exact).
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralCurve {
    /// Samples in schedule order (t decreasing).
    pub samples: Vec<CurveSample>,
    /// I(0) = ∫f.
    pub base: CurveSample,
}

impl IntegralCurve {
    pub fn ts(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.value).collect()
    }
}

fn exact_flat(h: &LogConcaveFn) -> bool {
    h.potential().flat_value().is_some() && h.support().is_bounded()
}

fn sample(h: &LogConcaveFn, t: f64, center: &[f64], radius: Option<f64>, spec: &QuadratureSpec) -> Result<CurveSample> {
    if exact_flat(h) {
        let e = integrate(h, spec)?;
        return Ok(CurveSample { t, value: e.value, error: e.error, radius: f64::INFINITY });
    }
    let (e, r) = match radius {
        Some(r) => (integrate_within(h, center, r, spec.rel_tol * (1e3 * t).max(1.0))?, r),
        None => {
            let e = integrate(h, spec).map_err(|err| match err {
                Error::Divergent(_) | Error::NoEnvelope => Error::Divergent(format!("∫f⋆(t·g) = ∞ at t = {t}")),
                other => other,
            })?;
            (e, truncation_radius(h, spec.tail_tol)?)
        }
    };
    if !e.value.is_finite() {
        return Err(Error::Divergent(format!("∫f⋆(t·g) = ∞ at t = {t}")));
    }
    Ok(CurveSample { t, value: e.value, error: e.error, radius: r })
}

/// I(t_k) = ∫f⋆(t_k·g) along the schedule. For compactly supported g the
/// truncation box of f is enlarged by t_k times a radius bound of K_g, so
/// that all samples share the same relative tail.
pub fn integral_curve(f: &LogConcaveFn, g: &LogConcaveFn, schedule: &Schedule, spec: &QuadratureSpec) -> Result<IntegralCurve> {
    check_dim(f.dim(), g.dim())?;
    f.check_integrable()?;
    let env = f.envelope()?;
    let tail = 1e-4 * spec.tail_tol;
    let r_f = if f.support().is_bounded() {
        let (lo, hi) = f.support().bounding_box();
        let far: Vec<f64> = (0..f.dim()).map(|k| (lo[k] - env.center[k]).abs().max((hi[k] - env.center[k]).abs())).collect();
        norm(&far)
    } else {
        truncation_radius(f, tail)?
    };
    let g_bound = g.support().is_bounded().then(|| g.support().radius_bound());
    let base = sample(f, 0.0, &env.center, Some(r_f), spec)?;
    let samples = schedule
        .ts()
        .par_iter()
        .map(|&t| {
            let h = sup_convolve(f, g, t)?;
            let radius = g_bound.map(|b| r_f + t * b);
            sample(&h, t, &env.center, radius, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntegralCurve { samples, base })
}

/// Value of δ from the curve, or a divergence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaLimit {
    /// ∫f times the extrapolated quotient; +∞ when divergence is suspected.
    pub value: f64,
    pub divergence_suspected: bool,
    /// q_k = (log I(t_k) − log I(0))/t_k in schedule order.
    pub quotients: Vec<f64>,
    /// Noise level of each quotient implied by the quadrature errors.
    pub noise: Vec<f64>,
    pub extrapolated_quotient: f64,
    /// |q_K − q_{K−1}| ≤ rel_tol·|q_K|.
    pub converged: bool,
    /// Largest decrease of q_k as t decreases (0 when monotone).
    pub max_monotonicity_violation: f64,
    /// Largest amount by which log I falls below the chord of its two
    /// neighbours (≤ 0 for a concave curve).
    pub max_concavity_defect: f64,
}

fn rel_noise(s: &CurveSample) -> f64 {
    (s.error / s.value).max(1e-13)
}

/// Extrapolates the log-quotients of the curve. q_k must be nondecreasing
/// as t decreases up to quadrature noise; otherwise the curve is rejected.
pub fn delta_limit(curve: &IntegralCurve, rel_tol: f64) -> Result<DeltaLimit> {
    let i0 = curve.base.value;
    if !(i0 > 0.0 && i0.is_finite()) {
        return Err(Error::IntegralOutOfRange(format!("∫f = {i0}")));
    }
    let k = curve.samples.len();
    if k < 2 {
        return Err(Error::InvalidArgument("curve needs at least two samples".into()));
    }
    let l0 = i0.ln();
    let quotients: Vec<f64> = curve.samples.iter().map(|s| (s.value.ln() - l0) / s.t).collect();
    let noise: Vec<f64> = curve
        .samples
        .iter()
        .map(|s| 4.0 * (rel_noise(s) + rel_noise(&curve.base)) / s.t)
        .collect();
    let mut max_violation: f64 = 0.0;
    for j in 1..k {
        let drop = quotients[j - 1] - quotients[j];
        max_violation = max_violation.max(drop);
        let allowed = noise[j] + noise[j - 1] + 1e-12 * quotients[j].abs();
        if drop > allowed {
            return Err(Error::NonMonotone { index: j, violation: drop });
        }
    }
    // concavity of log I on the points ordered by t, including t = 0
    let mut pts: Vec<(f64, f64)> = curve.samples.iter().map(|s| (s.t, s.value.ln())).collect();
    pts.push((0.0, l0));
    let mut defect = f64::NEG_INFINITY;
    for w in pts.windows(3) {
        let ((a, la), (b, lb), (c, lc)) = (w[0], w[1], w[2]);
        let chord = lc + (la - lc) * (b - c) / (a - c);
        defect = defect.max(chord - lb);
    }
    let (q_last, q_prev) = (quotients[k - 1], quotients[k - 2]);
    let ratio = curve.samples[k - 2].t / curve.samples[k - 1].t;
    let extrapolated = (ratio * q_last - q_prev) / (ratio - 1.0);
    let converged = (q_last - q_prev).abs() <= rel_tol * q_last.abs().max(f64::MIN_POSITIVE);
    let divergence_suspected = q_last > 1e3 * quotients[0].abs().max(1e-300) && q_last > q_prev + noise[k - 1];
    let value = if divergence_suspected { f64::INFINITY } else { i0 * extrapolated };
    Ok(DeltaLimit {
        value,
        divergence_suspected,
        quotients,
        noise,
        extrapolated_quotient: extrapolated,
        converged,
        max_monotonicity_violation: max_violation,
        max_concavity_defect: defect,
    })
}

/// ∫h_g dμ_f and ∫h_{K_g} dν_f.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSide {
    pub mu_term: f64,
    pub nu_term: f64,
    pub total: f64,
    pub support_provenance: SupportProvenance,
    /// Number of atoms of μ_f and ν_f.
    pub atoms: (usize, usize),
}

pub fn delta_measure_formula(f: &LogConcaveFn, g: &LogConcaveFn, spec: &QuadratureSpec) -> Result<MeasureSide> {
    check_dim(f.dim(), g.dim())?;
    let hg = support_function_of_function(g)?;
    let mu = build_mu(f, spec)?;
    let nu = build_nu(f, spec)?;
    let kg = g.support();
    let mut mu_term = mu.integrate_par(|y| hg.eval(y));
    if mu_term.is_finite() && !kg.is_bounded() && mu.len() > 2 {
        // the integrand must decay: the outer dyadic shell of the atoms may
        // not carry as much as the shell inside it
        let far = mu.atoms().map(|(p, _)| norm(p)).fold(0.0, f64::max);
        let shell = |a: f64, b: f64| mu.integrate_par(|y| if (a * far..=b * far).contains(&norm(y)) { hg.eval(y).abs() } else { 0.0 });
        let (inner, outer) = (shell(0.25, 0.5), shell(0.5 + 1e-12, 1.0));
        if inner > 0.0 && outer > 0.5 * inner {
            mu_term = f64::INFINITY;
        }
    }
    let nu_term = nu.integrate(|theta| kg.support(theta));
    Ok(MeasureSide {
        mu_term,
        nu_term,
        total: mu_term + nu_term,
        support_provenance: hg.provenance(),
        atoms: (mu.len(), nu.len()),
    })
}

/// Both sides of the main identity.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub lhs: DeltaLimit,
    pub rhs: MeasureSide,
    pub curve: IntegralCurve,
    /// |lhs − rhs| / max(|rhs|, 1).
    pub relative_error: f64,
}

pub fn relative_error(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    (lhs - rhs).abs() / rhs.abs().max(1.0)
}

pub fn variation_report(
    f: &LogConcaveFn,
    g: &LogConcaveFn,
    schedule: &Schedule,
    spec: &QuadratureSpec,
    rel_tol: f64,
) -> Result<VariationReport> {
    let curve = integral_curve(f, g, schedule, spec)?;
    let lhs = delta_limit(&curve, rel_tol)?;
    let rhs = delta_measure_formula(f, g, spec)?;
    let relative_error = relative_error(lhs.value, rhs.total);
    Ok(VariationReport { lhs, rhs, curve, relative_error })
}

/// δ(f,𝟙_L) = ∫₀^{max f} Per_L(F_s) ds with F_s = {f ≥ s}.
pub fn delta_via_levelsets(f: &LogConcaveFn, l: &ConvexBody, levels: &LevelGrid, spec: &QuadratureSpec) -> Result<f64> {
    check_dim(f.dim(), l.dim())?;
    let top = f
        .max_value()
        .ok_or_else(|| Error::Unsupported("level sets need a closed-form maximum of f".into()))?;
    let nodes = levels.nodes(top);
    let vals = nodes
        .par_iter()
        .map(|&(s, w)| Ok(w * perimeter(&level_set(f, s)?, l, spec)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(linalg::compensated_sum(vals))
}

/// (δ(f, e^c·g) − δ(f,g), c∫f) from the curve, and the same difference from
/// the measure formula.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingShift {
    pub limit_shift: f64,
    pub formula_shift: f64,
    pub expected: f64,
}

pub fn scaling_shift_check(
    f: &LogConcaveFn,
    g: &LogConcaveFn,
    c: f64,
    schedule: &Schedule,
    spec: &QuadratureSpec,
) -> Result<ScalingShift> {
    let scaled = g.scale_exp(c)?;
    let plain = delta_limit(&integral_curve(f, g, schedule, spec)?, 1e-3)?;
    let shifted = delta_limit(&integral_curve(f, &scaled, schedule, spec)?, 1e-3)?;
    let formula_shift = delta_measure_formula(f, &scaled, spec)?.total - delta_measure_formula(f, g, spec)?.total;
    Ok(ScalingShift {
        limit_shift: shifted.value - plain.value,
        formula_shift,
        expected: c * f.check_integrable()?,
    })
}

/// Extrapolated (f⋆(t·g)(x) − f(x))/t against h_g(∇φ(x))·f(x).
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseCheck {
    pub point: Vec<f64>,
    pub quotient: f64,
    pub expected: f64,
}

impl PointwiseCheck {
    /// Within `abs_tol` absolutely or `rel_tol` relatively.
    pub fn agrees(&self, abs_tol: f64, rel_tol: f64) -> bool {
        let d = (self.quotient - self.expected).abs();
        d <= abs_tol || d <= rel_tol * self.expected.abs()
    }
}

pub fn pointwise_derivative_check(f: &LogConcaveFn, g: &LogConcaveFn, x: &[f64], schedule: &Schedule) -> Result<PointwiseCheck> {
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), g.dim())?;
    if !g.support().is_bounded() {
        return Err(Error::Unbounded);
    }
    let grad = f.gradient(x)?;
    if grad.kink {
        return Err(Error::KinkPoint(x.to_vec()));
    }
    let fx = f.evaluate(x);
    let hg = support_function_of_function(g)?;
    let expected = hg.eval(&grad.value) * fx;
    let qs = schedule
        .ts()
        .iter()
        .map(|&t| Ok((sup_convolve(f, g, t)?.evaluate(x) - fx) / t))
        .collect::<Result<Vec<f64>>>()?;
    let k = qs.len();
    let ratio = schedule.ts()[k - 2] / schedule.ts()[k - 1];
    let quotient = (ratio * qs[k - 1] - qs[k - 2]) / (ratio - 1.0);
    Ok(PointwiseCheck { point: x.to_vec(), quotient, expected })
}

/// Seeded random points in the interior of K_f where f is not negligible.
pub fn jittered_interior_points(f: &LogConcaveFn, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let env = f.envelope()?;
    let n = f.dim();
    let top = f.evaluate(&env.center);
    let (lo, hi) = f.support().bounding_box();
    let r = 3.0f64.max(0.25 * env.radius);
    let lo: Vec<f64> = (0..n).map(|k| lo[k].max(env.center[k] - r)).collect();
    let hi: Vec<f64> = (0..n).map(|k| hi[k].min(env.center[k] + r)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 10_000 * count.max(1) {
            return Err(Error::Internal("could not place interior sample points".into()));
        }
        let x: Vec<f64> = (0..n).map(|k| rng.gen_range(lo[k]..hi[k])).collect();
        let v = f.evaluate(&x);
        if v > 1e-3 * top && f.gradient(&x).is_ok_and(|g| !g.kink) {
            out.push(x);
        }
    }
    Ok(out)
}

/// δ(f, g·𝟙_{|x| ≤ m}) for each m, from the measure formula.
pub fn truncation_convergence(f: &LogConcaveFn, g: &LogConcaveFn, ms: &[f64], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("truncation levels must increase".into()));
    }
    ms.iter()
        .map(|&m| {
            let gm = g.restrict(&ConvexBody::ball(vec![0.0; g.dim()], m)?)?;
            Ok(delta_measure_formula(f, &gm, spec)?.total)
        })
        .collect()
}

/// δ(f,g), δ(g,g), δ(g,f), δ(f,f) for g = f(· − x₀).
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessSanity {
    pub f_g: f64,
    pub g_g: f64,
    pub g_f: f64,
    pub f_f: f64,
}

impl UniquenessSanity {
    /// Largest of the two relative mismatches δ(f,g) vs δ(g,g) and δ(g,f)
    /// vs δ(f,f).
    pub fn residual(&self) -> f64 {
        relative_error(self.f_g, self.g_g).max(relative_error(self.g_f, self.f_f))
    }
}

pub fn uniqueness_sanity(f: &LogConcaveFn, x0: &[f64], spec: &QuadratureSpec) -> Result<UniquenessSanity> {
    let g = f.translate(x0)?;
    let d = |a: &LogConcaveFn, b: &LogConcaveFn| delta_measure_formula(a, b, spec).map(|m| m.total);
    Ok(UniquenessSanity { f_g: d(f, &g)?, g_g: d(&g, &g)?, g_f: d(&g, f)?, f_f: d(f, f)? })
}

//! One function per check name; each delegates to a single library
//! operation and turns its output into records.

use lcgeom::bodies::quermassintegrals;
use lcgeom::measures::centering_defect;
use lcgeom::tv::{coarea_check_grid, coarea_check_sampled, divergence_pairing_check, tv_representation, CoareaCheck, GridField, LevelGrid, TestField};
use lcgeom::variation::{
    jittered_interior_points, pointwise_derivative_check, relative_error, scaling_shift_check, truncation_convergence,
    uniqueness_sanity, variation_report, DeltaLimit,
};
use lcgeom::variation::delta_via_levelsets;
use lcgeom::{ConvexBody, LogConcaveFn, Potential, Result};
use serde_json::json;

use crate::io::read_grid_field;
use crate::report::CheckRecord;
use crate::scenario::{CheckName, Resolved};

pub fn run(check: CheckName, r: &Resolved) -> Vec<CheckRecord> {
    match check {
        CheckName::MainTheorem => main_theorem(r),
        CheckName::Coarea => vec![coarea(r)],
        CheckName::Quermass => vec![quermass(r)],
        CheckName::Centering => vec![centering(r)],
        CheckName::Scaling => vec![scaling(r)],
        CheckName::Pointwise => vec![pointwise(r)],
        CheckName::Truncation => vec![truncation(r)],
        CheckName::UniquenessSanity => vec![uniqueness(r)],
        CheckName::DivergencePairing => vec![pairing(r)],
    }
}

fn g_of(r: &Resolved) -> &LogConcaveFn {
    r.g.as_ref().expect("resolve() guarantees g")
}

/// K_g when g is the indicator of a body.
fn indicator_body(g: &LogConcaveFn) -> Option<&ConvexBody> {
    match g.potential() {
        Potential::WithIndicator { base, body } if base.flat_value() == Some(0.0) => Some(body),
        _ => None,
    }
}

fn concavity_record(label: &str, lhs: &DeltaLimit, tol: f64) -> CheckRecord {
    let residual = lhs.max_concavity_defect.max(0.0).max(lhs.max_monotonicity_violation);
    CheckRecord::new(format!("concavity/{label}"), None, None, residual, tol)
        .with("max_concavity_defect", lhs.max_concavity_defect)
        .with("max_monotonicity_violation", lhs.max_monotonicity_violation)
}

/// δ(f,g) from the limit and from the measure formula, at the default and
/// refined schedules, with the concavity diagnostics of each curve.
fn main_theorem(r: &Resolved) -> Vec<CheckRecord> {
    let s = &r.scenario;
    let tol = &s.tolerances;
    let g = g_of(r);
    let runs = [
        ("default", s.default_schedule(), tol.main_theorem),
        ("refined", s.refined_schedule(), tol.main_theorem_refined),
    ];
    let levelset = indicator_body(g)
        .filter(|_| r.f.max_value().is_some())
        .and_then(|body| delta_via_levelsets(&r.f, body, &LevelGrid::default(), &r.spec).ok());
    let mut out = Vec::new();
    for (label, schedule, t) in runs {
        let name = format!("main-theorem/{label}");
        let rep = match schedule.and_then(|sch| variation_report(&r.f, g, &sch, &r.spec, t)) {
            Ok(rep) => rep,
            Err(e) => {
                out.push(CheckRecord::failed(name, t, e));
                out.push(CheckRecord::failed(format!("concavity/{label}"), tol.concavity, "no curve"));
                continue;
            }
        };
        let residual = if rep.lhs.divergence_suspected { f64::INFINITY } else { rep.relative_error };
        let mut rec = CheckRecord::new(name, Some(rep.lhs.value), Some(rep.rhs.total), residual, t)
            .with("mu_term", rep.rhs.mu_term)
            .with("nu_term", rep.rhs.nu_term)
            .with("support_provenance", rep.rhs.support_provenance.tag())
            .with("mu_atoms", rep.rhs.atoms.0)
            .with("nu_atoms", rep.rhs.atoms.1)
            .with("extrapolated_quotient", rep.lhs.extrapolated_quotient)
            .with("converged", rep.lhs.converged)
            .with("divergence_suspected", rep.lhs.divergence_suspected)
            .with("integral_f", rep.curve.base.value)
            .with_curve(format!("quotients/{label}"), rep.curve.ts(), rep.lhs.quotients.clone())
            .with_curve(format!("log-integral/{label}"), rep.curve.ts(), rep.curve.values().iter().map(|v| v.ln()).collect());
        if let Some(v) = levelset {
            rec = rec.with("levelset_route", v);
        }
        out.push(rec);
        out.push(concavity_record(label, &rep.lhs, tol.concavity));
    }
    out
}

fn coarea_grid(r: &Resolved, nodes: usize) -> Result<CoareaCheck> {
    let o = &r.scenario.options.coarea;
    let l = r.l.as_ref().expect("resolve() guarantees L");
    let levels = LevelGrid::default();
    if let Some(path) = &o.field {
        let field = read_grid_field(std::path::Path::new(path)).map_err(lcgeom::Error::InvalidArgument)?;
        return coarea_check_grid(&field, l, &levels);
    }
    let n = r.f.dim();
    let (lo, hi) = if o.lo.len() == n && o.hi.len() == n {
        (o.lo.clone(), o.hi.clone())
    } else {
        (vec![-20.0; n], vec![20.0; n])
    };
    let field = GridField::sample(&r.f, &lo, &hi, nodes)?;
    coarea_check_sampled(&r.f, &field, l, &levels, &r.spec)
}

/// TV_L(f) against ∫Per_L(F_s) ds over the interpolated level sets of a
/// lattice sampling of f.
fn coarea(r: &Resolved) -> CheckRecord {
    let s = &r.scenario;
    let tol = if r.f.dim() == 1 { s.tolerances.coarea_1d } else { s.tolerances.coarea_2d };
    let nodes = s.options.coarea.nodes;
    let c = match coarea_grid(r, nodes) {
        Ok(c) => c,
        Err(e) => return CheckRecord::failed("coarea", tol, e),
    };
    let (xs, ys): (Vec<f64>, Vec<f64>) = c.curve.iter().copied().unzip();
    let mut rec = CheckRecord::new("coarea", Some(c.total_variation), Some(c.level_integral), c.residual, tol)
        .with("nodes", nodes)
        .with_curve("perimeter", xs, ys);
    if s.options.coarea.halving && s.options.coarea.field.is_none() {
        let coarse = (nodes - 1) / 2 + 1;
        match coarea_grid(r, coarse) {
            Ok(cc) => {
                rec = rec
                    .with("coarse_nodes", coarse)
                    .with("coarse_residual", cc.residual)
                    .with("halving_ratio", cc.residual / c.residual);
            }
            Err(e) => rec = rec.with("coarse_error", e.to_string()),
        }
    }
    rec
}

fn quermass(r: &Resolved) -> CheckRecord {
    let tol = r.scenario.tolerances.quermass;
    let (k, l) = (r.k.as_ref().expect("K"), r.l.as_ref().expect("L"));
    let q = match quermassintegrals(k, l) {
        Ok(q) => q,
        Err(e) => return CheckRecord::failed("quermass", tol, e),
    };
    let half = k.minkowski_sum(&l.scale(0.5)).and_then(|b| b.volume()).unwrap_or(f64::NAN);
    let expected = &r.scenario.options.quermass_expected;
    let coeff_err = if expected.is_empty() {
        0.0
    } else if expected.len() != q.coefficients.len() {
        f64::INFINITY
    } else {
        q.coefficients.iter().zip(expected).map(|(a, b)| relative_error(*a, *b)).fold(0.0, f64::max)
    };
    let residual = q.fit_residual.max(q.held_out_residual).max(coeff_err);
    CheckRecord::new("quermass", Some(q.steiner(0.5)), Some(half), residual, tol)
        .with("coefficients", q.coefficients.clone())
        .with("node_volumes", q.node_volumes.clone())
        .with("fit_residual", q.fit_residual)
        .with("held_out_residual", q.held_out_residual)
        .with("expected_mismatch", coeff_err)
}

/// |∫y dμ_f + ∫θ dν_f| relative to 1 + ∫|y| dμ_f.
fn centering(r: &Resolved) -> CheckRecord {
    let tol = r.scenario.tolerances.exact;
    match centering_defect(&r.f, &r.spec) {
        Ok(d) => {
            let scale = 1.0 + d.mu_abs_moment;
            CheckRecord::new("centering", Some(lcgeom::linalg::norm(&d.mu_moment)), Some(lcgeom::linalg::norm(&d.nu_moment)), d.norm() / scale, tol)
                .with("defect", d.defect.clone())
                .with("mu_moment", d.mu_moment.clone())
                .with("nu_moment", d.nu_moment.clone())
                .with("mu_abs_moment", d.mu_abs_moment)
        }
        Err(e) => CheckRecord::failed("centering", tol, e),
    }
}

/// δ(f, e^c g) − δ(f, g) = c∫f for every listed c.
fn scaling(r: &Resolved) -> CheckRecord {
    let s = &r.scenario;
    let tol = s.tolerances.scaling;
    let schedule = match s.default_schedule() {
        Ok(x) => x,
        Err(e) => return CheckRecord::failed("scaling", tol, e),
    };
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for &c in &s.options.scaling_constants {
        match scaling_shift_check(&r.f, g_of(r), c, &schedule, &r.spec) {
            Ok(x) => {
                let scale = 1.0 + x.expected.abs();
                let e = (x.limit_shift - x.expected).abs().max((x.formula_shift - x.expected).abs()) / scale;
                worst = worst.max(e);
                rows.push(json!({"c": c, "limit_shift": x.limit_shift, "formula_shift": x.formula_shift, "expected": x.expected}));
            }
            Err(e) => return CheckRecord::failed("scaling", tol, format!("c = {c}: {e}")),
        }
    }
    CheckRecord::new("scaling", None, None, worst, tol).with("shifts", rows)
}

/// Extrapolated pointwise quotients at jittered points. The residual is the
/// worst min(abs/abs_tol, rel/rel_tol), so it passes at ≤ 1.
fn pointwise(r: &Resolved) -> CheckRecord {
    let s = &r.scenario;
    let (abs_tol, rel_tol) = (s.tolerances.pointwise_abs, s.tolerances.pointwise_rel);
    let seed = s.seed.expect("resolve() guarantees a seed");
    let run = || -> Result<(f64, Vec<serde_json::Value>)> {
        let schedule = s.pointwise_schedule()?;
        let pts = jittered_interior_points(&r.f, s.options.pointwise_points, seed)?;
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for x in &pts {
            let c = pointwise_derivative_check(&r.f, g_of(r), x, &schedule)?;
            let d = (c.quotient - c.expected).abs();
            let rel = if c.expected != 0.0 { d / c.expected.abs() } else if d == 0.0 { 0.0 } else { f64::INFINITY };
            let score = (d / abs_tol).min(rel / rel_tol);
            worst = worst.max(if score.is_nan() { 0.0 } else { score });
            rows.push(json!({"point": x, "quotient": c.quotient, "expected": c.expected}));
        }
        Ok((worst, rows))
    };
    match run() {
        Ok((worst, rows)) => CheckRecord::new("pointwise", None, None, worst, 1.0)
            .with("abs_tol", abs_tol)
            .with("rel_tol", rel_tol)
            .with("points", rows),
        Err(e) => CheckRecord::failed("pointwise", 1.0, e),
    }
}

/// δ(f, g·𝟙_{B(0,m)}) increasing in m and approaching δ(f,g).
fn truncation(r: &Resolved) -> CheckRecord {
    let s = &r.scenario;
    let tol = s.tolerances.truncation;
    let radii = &s.options.truncation_radii;
    let values = match truncation_convergence(&r.f, g_of(r), radii, &r.spec) {
        Ok(v) => v,
        Err(e) => return CheckRecord::failed("truncation", tol, e),
    };
    let direct = match s.options.truncation_expected {
        Some(v) => v,
        None => match lcgeom::variation::delta_measure_formula(&r.f, g_of(r), &r.spec) {
            Ok(m) => m.total,
            Err(e) => return CheckRecord::failed("truncation", tol, e),
        },
    };
    let drop = values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    // increases within quadrature noise are accepted
    let noise = 1e-9 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let monotone = drop <= noise;
    let last = *values.last().unwrap_or(&f64::NAN);
    let residual = if monotone { relative_error(last, direct) } else { f64::INFINITY };
    CheckRecord::new("truncation", Some(last), Some(direct), residual, tol)
        .with("monotone", monotone)
        .with("largest_decrease", drop)
        .with_curve("truncated-delta", radii.clone(), values)
}

fn uniqueness(r: &Resolved) -> CheckRecord {
    let s = &r.scenario;
    let tol = s.tolerances.uniqueness;
    let shift = if s.options.uniqueness_shift.is_empty() { vec![1.0; r.f.dim()] } else { s.options.uniqueness_shift.clone() };
    match uniqueness_sanity(&r.f, &shift, &r.spec) {
        Ok(u) => CheckRecord::new("uniqueness-sanity", Some(u.f_g), Some(u.g_g), u.residual(), tol)
            .with("delta_f_g", u.f_g)
            .with("delta_g_g", u.g_g)
            .with("delta_g_f", u.g_f)
            .with("delta_f_f", u.f_f),
        Err(e) => CheckRecord::failed("uniqueness-sanity", tol, e),
    }
}

/// ∫f divΦ = ∫f⟨∇φ,Φ⟩ + ∫_{∂K_f} f⟨Φ,n⟩ and ∫f divΦ ≤ TV_L(f) for the
/// catalog fields scaled into ‖Φ‖_L ≤ 1.
fn pairing(r: &Resolved) -> CheckRecord {
    let tol = r.scenario.tolerances.exact;
    let n = r.f.dim();
    let l = r.l.clone().unwrap_or_else(|| ConvexBody::unit_ball(n));
    let run = || -> Result<(f64, f64, f64, Vec<serde_json::Value>)> {
        let tv = tv_representation(&r.f, &l, &r.spec)?.total();
        let mut identity: f64 = 0.0;
        let mut excess: f64 = 0.0;
        let mut rows = Vec::new();
        for phi in TestField::catalog(n)? {
            let phi = phi.scaled_into(&l)?;
            let c = divergence_pairing_check(&r.f, &phi, &r.spec)?;
            identity = identity.max(c.residual());
            excess = excess.max(c.lhs - tv);
            rows.push(json!({"lhs": c.lhs, "volume_term": c.volume_term, "boundary_term": c.boundary_term}));
        }
        Ok((tv, identity, excess, rows))
    };
    match run() {
        Ok((tv, identity, excess, rows)) => CheckRecord::new("divergence-pairing", None, Some(tv), identity.max(excess.max(0.0)), tol)
            .with("identity_residual", identity)
            .with("dual_excess", excess)
            .with("fields", rows),
        Err(e) => CheckRecord::failed("divergence-pairing", tol, e),
    }
}

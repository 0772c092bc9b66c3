//! Legendre–Fenchel transforms and support functions of log-concave functions.

use super::function::LogConcaveFn;
use super::grid::{grid_conjugate, GridPotential, Lattice};
use super::potential::Potential;
use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::linalg::{self, dot};

/// φ*(y) = sup_x ⟨x,y⟩ − φ(x), in closed form where the catalog admits it
/// and otherwise as a lazily maximized conjugate (1D and radial potentials).
pub fn legendre_transform(phi: &Potential) -> Result<Potential> {
    let n = phi.dim();
    let zero = || vec![0.0; n];
    Ok(match phi {
        Potential::Quadratic { a, b, c } => {
            if a.iter().all(|v| *v == 0.0) {
                return Err(Error::Unsupported("conjugate of an affine function is a point indicator".into()));
            }
            if !linalg::is_spd(a) {
                return Err(Error::Unsupported("conjugate of a degenerate quadratic".into()));
            }
            let inv = a.clone().try_inverse().ok_or_else(|| Error::Internal("SPD inverse".into()))?;
            let ib = linalg::mat_vec(&inv, b);
            Potential::Quadratic { a: inv, b: linalg::scale(&ib, -1.0), c: 0.5 * dot(b, &ib) - c }
        }
        Potential::PowerNorm { alpha, p, .. } => {
            if *p == 1.0 {
                Potential::WithIndicator { base: Box::new(Potential::constant(n, 0.0)), body: ConvexBody::ball(zero(), *alpha)? }
            } else {
                let q = p / (p - 1.0);
                let a = (1.0 - 1.0 / p) * (alpha * p).powf(-1.0 / (p - 1.0));
                Potential::PowerNorm { dim: n, alpha: a, p: q }
            }
        }
        Potential::Linear { .. } => {
            return Err(Error::Unsupported("conjugate of an affine function is a point indicator".into()))
        }
        Potential::WithIndicator { base, body } => match &**base {
            Potential::Linear { b, c } => {
                Potential::affine(Potential::Support { body: body.clone() }, b.clone(), zero(), -c)
            }
            Potential::Quadratic { a, b, c } if a.iter().all(|v| *v == 0.0) => {
                Potential::affine(Potential::Support { body: body.clone() }, b.clone(), zero(), -c)
            }
            _ => numeric(phi)?,
        },
        Potential::Support { body } => {
            Potential::WithIndicator { base: Box::new(Potential::constant(n, 0.0)), body: body.clone() }
        }
        Potential::Affine { base, shift, slope, offset } => {
            let inner = legendre_transform(base)?;
            Potential::affine(inner, slope.clone(), shift.clone(), -offset - dot(shift, slope))
        }
        Potential::NumericConjugate { of } => (**of).clone(),
        Potential::Barrier { .. } | Potential::Grid(_) | Potential::InfConv(_) => numeric(phi)?,
    })
}

fn numeric(phi: &Potential) -> Result<Potential> {
    let supported = phi.dim() == 1
        || phi.radial().is_some()
        || matches!(phi, Potential::WithIndicator { base, .. } if base.radial().is_some());
    if !supported {
        return Err(Error::Unsupported("pointwise conjugate of this potential; use the lattice route".into()));
    }
    Ok(Potential::NumericConjugate { of: Box::new(phi.clone()) })
}

/// φ* sampled on `query`, from φ sampled on `source`, by iterated
/// one-dimensional conjugates.
pub fn legendre_transform_grid(phi: &Potential, source: &Lattice, query: &Lattice) -> Result<GridPotential> {
    let values: Vec<f64> = (0..source.len()).map(|i| phi.value(&source.node(i))).collect();
    if values.iter().all(|v| v.is_infinite()) {
        return Err(Error::EmptyDomain);
    }
    grid_conjugate(&GridPotential::new(source.clone(), values)?, query)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportProvenance {
    ClosedForm,
    /// Evaluated by one-dimensional maximization per query point.
    Numeric,
    GridConjugate,
}

impl SupportProvenance {
    pub fn tag(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::Numeric => "numeric",
            Self::GridConjugate => "grid-conjugate",
        }
    }
}

/// h_g = (−log g)*.
#[derive(Debug, Clone)]
pub struct SupportFn {
    potential: Potential,
    provenance: SupportProvenance,
}

impl SupportFn {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.potential.value(y)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn provenance(&self) -> SupportProvenance {
        self.provenance
    }
}

fn uses_numeric(p: &Potential) -> bool {
    match p {
        Potential::NumericConjugate { .. } => true,
        Potential::Affine { base, .. } | Potential::WithIndicator { base, .. } => uses_numeric(base),
        _ => false,
    }
}

/// Support function of a log-concave function.
pub fn support_function_of_function(g: &LogConcaveFn) -> Result<SupportFn> {
    let p = g.potential();
    if let Potential::Grid(grid) = p {
        if grid.values.iter().all(|v| v.is_infinite()) {
            return Err(Error::ZeroFunction);
        }
        let l = &grid.lattice;
        let n = l.dim();
        // dual lattice covering the slopes the primal lattice can resolve
        let width: Vec<f64> = (0..n).map(|k| l.upper(k) - l.origin[k]).collect();
        let counts = l.counts.clone();
        let origin: Vec<f64> = (0..n).map(|k| -((counts[k] - 1) as f64) / width[k]).collect();
        let spacing: Vec<f64> = (0..n).map(|k| 2.0 / width[k]).collect();
        let q = Lattice::new(origin, spacing, counts)?;
        let h = grid_conjugate(grid, &q)?;
        return Ok(SupportFn { potential: Potential::Grid(h), provenance: SupportProvenance::GridConjugate });
    }
    let h = legendre_transform(p)?;
    let provenance = if uses_numeric(&h) { SupportProvenance::Numeric } else { SupportProvenance::ClosedForm };
    Ok(SupportFn { potential: h, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::potential::sample_points;
    use proptest::prelude::*;

    fn brute_conjugate_1d(phi: &Potential, y: f64, lo: f64, hi: f64) -> f64 {
        let m = 100_000;
        (0..=m)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / m as f64;
                x * y - phi.value(&[x])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn quadratic_is_self_dual() {
        let q = Potential::half_square(2);
        let c = legendre_transform(&q).unwrap();
        for y in [[1.0, 2.0], [-0.5, 0.3]] {
            assert!((c.value(&y) - 0.5 * (y[0] * y[0] + y[1] * y[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn interval_indicator_and_absolute_value() {
        let ind = Potential::with_indicator(Potential::constant(1, 0.0), ConvexBody::interval(-1.0, 1.0).unwrap()).unwrap();
        let c = legendre_transform(&ind).unwrap();
        for y in [-2.0, -0.3, 0.0, 1.7] {
            assert!((c.value(&[y]) - brute_conjugate_1d(&ind, y, -1.0, 1.0)).abs() < 1e-12);
            assert!((c.value(&[y]) - f64::abs(y)).abs() < 1e-15);
        }
        let abs = Potential::power_norm(1, 1.0, 1.0).unwrap();
        let c = legendre_transform(&abs).unwrap();
        assert_eq!(c.value(&[0.5]), 0.0);
        assert_eq!(c.value(&[1.5]), f64::INFINITY);
        // brute force over a growing window diverges outside [−1,1]
        assert!(brute_conjugate_1d(&abs, 1.5, -100.0, 100.0) > 10.0);
    }

    #[test]
    fn power_norm_conjugate_matches_brute_force() {
        let p = Potential::power_norm(1, 0.7, 3.0).unwrap();
        let c = legendre_transform(&p).unwrap();
        for y in [-2.0, 0.4, 1.3] {
            assert!((c.value(&[y]) - brute_conjugate_1d(&p, y, -5.0, 5.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn numeric_conjugate_of_barrier_and_biconjugate() {
        let b = Potential::barrier(1, 1.0, 1.0).unwrap();
        let c = legendre_transform(&b).unwrap();
        for y in [-3.0, 0.5, 2.0] {
            assert!((c.value(&[y]) - brute_conjugate_1d(&b, y, -0.999_999, 0.999_999)).abs() < 1e-6);
        }
        let back = legendre_transform(&c).unwrap();
        assert!((back.value(&[0.3]) - b.value(&[0.3])).abs() < 1e-12);
    }

    #[test]
    fn support_of_scaled_indicator() {
        let l = ConvexBody::axis_box(vec![-1.0, -2.0], vec![1.0, 0.5]).unwrap();
        let g = LogConcaveFn::indicator(l.clone()).scale_exp(0.7).unwrap();
        let h = support_function_of_function(&g).unwrap();
        assert_eq!(h.provenance(), SupportProvenance::ClosedForm);
        for y in [[0.3, -1.0], [2.0, 4.0], [0.0, 0.0]] {
            assert!((h.eval(&y) - (l.support(&y) + 0.7)).abs() < 1e-14);
        }
        // h(0) = −inf(−log g) = log sup g
        assert!((h.eval(&[0.0, 0.0]) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn grid_conjugate_of_sampled_quadratic() {
        let q = Potential::half_square(1);
        let src = Lattice::spanning(&[-4.0], &[4.0], 801).unwrap();
        let qry = Lattice::spanning(&[-2.0], &[2.0], 41).unwrap();
        let c = legendre_transform_grid(&q, &src, &qry).unwrap();
        for y in [-1.5, 0.0, 1.0] {
            assert!((c.eval(&[y]) - 0.5 * y * y).abs() < 1e-3);
        }
    }

    #[test]
    fn radial_quadratic_restricted_to_box() {
        let body = ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let p = Potential::with_indicator(Potential::half_square(2), body).unwrap();
        let c = legendre_transform(&p).unwrap();
        // separable: each axis sup_{|x|≤1} xy − x²/2
        let axis = |y: f64| if y.abs() <= 1.0 { 0.5 * y * y } else { y.abs() - 0.5 };
        for y in [[0.3, 2.0], [-3.0, 0.1], [1.5, -1.5]] {
            assert!((c.value(&y) - axis(y[0]) - axis(y[1])).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn young_fenchel_for_closed_forms(x in -3.0f64..3.0, y in -3.0f64..3.0, alpha in 0.2f64..3.0, p in 1.1f64..4.0) {
            let phi = Potential::power_norm(1, alpha, p).unwrap();
            let c = legendre_transform(&phi).unwrap();
            prop_assert!(phi.value(&[x]) + c.value(&[y]) >= x * y - 1e-9);
            let back = legendre_transform(&c).unwrap();
            prop_assert!((back.value(&[x]) - phi.value(&[x])).abs() <= 1e-9 * (1.0 + phi.value(&[x])));
        }
    }

    #[test]
    fn conjugates_are_convex() {
        let pts = sample_points(&[-2.0, -2.0], &[2.0, 2.0], 6);
        let l = ConvexBody::polytope(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = LogConcaveFn::indicator(l);
        let h = support_function_of_function(&g).unwrap();
        assert!(h.potential().check_convexity(&pts, 1e-12));
    }
}

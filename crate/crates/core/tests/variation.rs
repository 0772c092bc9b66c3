use std::f64::consts::PI;

use lcgeom::convex::{integrate, sup_convolve, support_function_of_function};
use lcgeom::measures::centering_defect;
use lcgeom::variation::{delta_measure_formula, scaling_shift_check, variation_report, Schedule};
use lcgeom::{ConvexBody, LogConcaveFn, QuadratureSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn interval() -> LogConcaveFn {
    LogConcaveFn::indicator(ConvexBody::interval(-1.0, 1.0).unwrap())
}

#[test]
fn gaussian_against_interval_is_two() {
    let r = variation_report(&LogConcaveFn::gaussian(1), &interval(), &Schedule::default(), &spec(), 1e-3).unwrap();
    assert!((r.lhs.value - 2.0).abs() <= 1e-3, "{}", r.lhs.value);
    assert!((r.rhs.total - 2.0).abs() <= 1e-3, "{}", r.rhs.total);
}

#[test]
fn half_exponential_against_interval_is_two() {
    let r = variation_report(&LogConcaveFn::half_exponential(1), &interval(), &Schedule::default(), &spec(), 1e-3).unwrap();
    assert!((r.lhs.value - 2.0).abs() <= 1e-3);
    assert!((r.rhs.total - 2.0).abs() <= 1e-3);
    assert!((r.rhs.nu_term - 1.0).abs() < 1e-12);
}

#[test]
fn square_against_disk_is_its_perimeter() {
    let f = LogConcaveFn::indicator(ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
    let g = LogConcaveFn::indicator(ConvexBody::unit_ball(2));
    let r = variation_report(&f, &g, &Schedule::default(), &spec(), 1e-3).unwrap();
    assert!((r.lhs.value - 8.0).abs() <= 1e-3);
    assert!((r.rhs.total - 8.0).abs() <= 1e-3);
}

#[test]
fn gaussian_mean_width() {
    // δ(γ, 𝟙_{rB}) = ∫ r|y| e^{−|y|²/2} dy = r·2π·√(π/2) in the plane
    let r = 0.7;
    let g = LogConcaveFn::indicator(ConvexBody::ball(vec![0.0, 0.0], r).unwrap());
    let d = delta_measure_formula(&LogConcaveFn::gaussian(2), &g, &spec()).unwrap();
    let oracle = r * 2.0 * PI * (PI / 2.0).sqrt();
    assert!((d.total - oracle).abs() <= 1e-6 * oracle, "{} vs {oracle}", d.total);
}

#[test]
fn gaussian_self_variation() {
    // δ(γ,γ) = ∫ |y|²/2 dγ(y) = n/2 · (2π)^{n/2}
    for n in [1usize, 2] {
        let f = LogConcaveFn::gaussian(n);
        let d = delta_measure_formula(&f, &f, &spec()).unwrap();
        let oracle = n as f64 / 2.0 * (2.0 * PI).powf(n as f64 / 2.0);
        assert!((d.total - oracle).abs() <= 1e-6 * oracle, "n = {n}: {}", d.total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gaussian_sup_convolution_integral(t in 0.01f64..4.0) {
        // the potentials inf-convolve to x²/(2(1 + t)), so I(t) = √(2π(1 + t))
        let f = LogConcaveFn::gaussian(1);
        let h = sup_convolve(&f, &f, t).unwrap();
        let v = integrate(&h, &spec()).unwrap().value;
        prop_assert!((v - (2.0 * PI * (1.0 + t)).sqrt()).abs() < 1e-7);
    }

    #[test]
    fn support_function_of_shifted_gaussian(m0 in -2.0f64..2.0, m1 in -2.0f64..2.0, a in 0.5f64..3.0, b in -0.4f64..0.4, y0 in -3.0f64..3.0, y1 in -3.0f64..3.0) {
        // h(y) = ⟨m,y⟩ + ½ yᵀA⁻¹y
        let mat = DMatrix::from_row_slice(2, 2, &[a, b, b, 1.0]);
        let g = LogConcaveFn::gaussian_with(vec![m0, m1], mat).unwrap();
        let det = a - b * b;
        let inv = [1.0 / det, -b / det, -b / det, a / det];
        let quad = inv[0] * y0 * y0 + 2.0 * inv[1] * y0 * y1 + inv[3] * y1 * y1;
        let oracle = m0 * y0 + m1 * y1 + 0.5 * quad;
        let h = support_function_of_function(&g).unwrap();
        prop_assert!((h.eval(&[y0, y1]) - oracle).abs() < 1e-9 * (1.0 + oracle.abs()));
    }

    #[test]
    fn scaling_shift_is_c_times_mass(c in -2.0f64..2.0) {
        let f = LogConcaveFn::gaussian(1);
        let s = scaling_shift_check(&f, &interval(), c, &Schedule::default(), &spec()).unwrap();
        let mass = (2.0 * PI).sqrt();
        prop_assert!((s.expected - c * mass).abs() < 1e-9);
        prop_assert!((s.limit_shift - s.expected).abs() <= 1e-3 * (1.0 + c.abs() * mass));
        prop_assert!((s.formula_shift - s.expected).abs() <= 1e-6 * (1.0 + c.abs() * mass));
    }

    #[test]
    fn translated_simplex_indicator_is_centered(x in -2.0f64..2.0, y in -2.0f64..2.0, s in 0.2f64..3.0) {
        let body = ConvexBody::polytope(&[vec![x, y], vec![x + s, y], vec![x, y + 2.0 * s]]).unwrap();
        let d = centering_defect(&LogConcaveFn::indicator(body), &spec()).unwrap();
        prop_assert!(d.norm() <= 1e-9 * (1.0 + d.mu_abs_moment));
    }
}

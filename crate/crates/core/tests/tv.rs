use std::f64::consts::PI;

use lcgeom::tv::{coarea_check, divergence_pairing_check, perimeter, tv_representation, LevelGrid, TestField};
use lcgeom::{ConvexBody, LogConcaveFn, QuadratureSpec};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn square() -> ConvexBody {
    ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
}

#[test]
fn isotropic_tv_of_gaussian() {
    // ∫|∇γ| = ∫|x| e^{−|x|²/2} dx = 2π √(π/2)
    let tv = tv_representation(&LogConcaveFn::gaussian(2), &ConvexBody::unit_ball(2), &spec()).unwrap();
    assert!((tv.total() - 2.0 * PI * (PI / 2.0).sqrt()).abs() < 1e-7);
    assert_eq!(tv.boundary, 0.0);
}

#[test]
fn tv_of_indicator_is_perimeter() {
    let f = LogConcaveFn::indicator(square());
    let tv = tv_representation(&f, &ConvexBody::unit_ball(2), &spec()).unwrap();
    assert!((tv.total() - 8.0).abs() < 1e-10);
    assert_eq!(tv.absolutely_continuous, 0.0);
}

#[test]
fn coarea_for_radial_exponential() {
    let f = LogConcaveFn::power(2, 1.0, 1.0).unwrap();
    for l in [ConvexBody::unit_ball(2), square()] {
        let c = coarea_check(&f, &l, &LevelGrid::default(), &spec()).unwrap();
        assert!(c.residual < 1e-5, "{}", c.residual);
    }
}

#[test]
fn pairing_identity_and_dual_bound() {
    let l = square();
    let f = LogConcaveFn::half_exponential(2);
    let tv = tv_representation(&f, &l, &spec()).unwrap().total();
    for phi in TestField::catalog(2).unwrap() {
        let phi = phi.scaled_into(&l).unwrap();
        let c = divergence_pairing_check(&f, &phi, &spec()).unwrap();
        assert!(c.residual() < 1e-6);
        assert!(c.lhs <= tv + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disk_perimeter_under_square_norm(r in 0.1f64..5.0) {
        // r ∫ (|cos θ| + |sin θ|) dθ = 8r
        let disk = ConvexBody::ball(vec![0.0, 0.0], r).unwrap();
        prop_assert!((perimeter(&disk, &square(), &spec()).unwrap() - 8.0 * r).abs() < 1e-8 * r);
    }

    #[test]
    fn interval_perimeter(a in -3.0f64..0.0, b in 0.1f64..3.0, lo in -3.0f64..-0.1, hi in 0.1f64..3.0) {
        // Per_L([a,b]) = h_L(1) + h_L(−1) = hi − lo
        let body = ConvexBody::interval(a, b).unwrap();
        let l = ConvexBody::interval(lo, hi).unwrap();
        prop_assert!((perimeter(&body, &l, &spec()).unwrap() - (hi - lo)).abs() < 1e-12);
    }
}

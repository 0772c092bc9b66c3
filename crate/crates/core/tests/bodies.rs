use std::f64::consts::PI;

use approx::assert_relative_eq;
use lcgeom::bodies::{anisotropic_perimeter, quermassintegrals, surface_area_measure};
use lcgeom::ConvexBody;
use proptest::prelude::*;

/// Area of a convex polygon whose vertices come from a brute-force hull
/// (gift wrapping on the raw points).
fn oracle_hull_area(points: &[[f64; 2]]) -> f64 {
    let start = (0..points.len())
        .min_by(|&a, &b| points[a][0].partial_cmp(&points[b][0]).unwrap().then(points[a][1].partial_cmp(&points[b][1]).unwrap()))
        .unwrap();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull = vec![start];
    let mut cur = start;
    loop {
        let mut next = (cur + 1) % points.len();
        for j in 0..points.len() {
            if cross(points[cur], points[next], points[j]) < 0.0 {
                next = j;
            }
        }
        if next == start || hull.len() > points.len() {
            break;
        }
        hull.push(next);
        cur = next;
    }
    let mut a = 0.0;
    for i in 0..hull.len() {
        let (p, q) = (points[hull[i]], points[hull[(i + 1) % hull.len()]]);
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a.abs()
}

#[test]
fn square_disk_quermassintegrals() {
    let k = ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let q = quermassintegrals(&k, &ConvexBody::unit_ball(2)).unwrap();
    assert_relative_eq!(q.coefficients[0], 4.0, max_relative = 1e-10);
    assert_relative_eq!(q.coefficients[1], 4.0, max_relative = 1e-10);
    assert_relative_eq!(q.coefficients[2], PI, max_relative = 1e-10);
    assert!(q.fit_residual <= 1e-8 && q.held_out_residual <= 1e-8);
}

#[test]
fn triangle_surface_measure_closes() {
    let tri = ConvexBody::polytope(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let s = surface_area_measure(&tri).unwrap();
    assert_relative_eq!(s.total_mass(), 12.0, max_relative = 1e-12);
    for m in s.moment() {
        assert!(m.abs() < 1e-12);
    }
}

#[test]
fn cube_quermassintegrals_against_ball() {
    // |[0,1]³ + tB| = 1 + 6t + 3πt² + 4π/3 t³ = Σ binom(3,k) W_k t^k
    let k = ConvexBody::axis_box(vec![0.0; 3], vec![1.0; 3]).unwrap();
    let q = quermassintegrals(&k, &ConvexBody::unit_ball(3)).unwrap();
    let expected = [1.0, 2.0, PI, 4.0 * PI / 3.0];
    for (a, b) in q.coefficients.iter().zip(expected) {
        assert_relative_eq!(*a, b, max_relative = 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polygon_area_matches_gift_wrapping(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..14)) {
        let raw: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let oracle = oracle_hull_area(&raw);
        prop_assume!(oracle > 1e-3);
        let body = ConvexBody::polytope(&pts.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()).unwrap();
        prop_assert!((body.volume().unwrap() - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn support_function_is_max_over_points(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..12),
        angle in 0.0f64..(2.0 * PI),
    ) {
        let verts: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
        prop_assume!(oracle_hull_area(&pts.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>()) > 1e-3);
        let body = ConvexBody::polytope(&verts).unwrap();
        let theta = [angle.cos(), angle.sin()];
        let oracle = verts.iter().map(|v| v[0] * theta[0] + v[1] * theta[1]).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((body.support(&theta) - oracle).abs() < 1e-9);
    }

    #[test]
    fn rectangle_steiner_polynomial(a in 0.1f64..4.0, b in 0.1f64..4.0, t in 0.0f64..3.0) {
        // |R + tB| = ab + 2(a + b)t + πt²
        let k = ConvexBody::axis_box(vec![0.0, 0.0], vec![a, b]).unwrap();
        let q = quermassintegrals(&k, &ConvexBody::unit_ball(2)).unwrap();
        let oracle = a * b + 2.0 * (a + b) * t + PI * t * t;
        prop_assert!((q.steiner(t) - oracle).abs() <= 1e-8 * oracle);
    }

    #[test]
    fn anisotropic_perimeter_of_box_under_square_norm(a in 0.1f64..4.0, b in 0.1f64..4.0) {
        // h_L(±e_i) = 1 for L = [−1,1]², so Per_L is the Euclidean perimeter
        let k = ConvexBody::axis_box(vec![0.0, 0.0], vec![a, b]).unwrap();
        let l = ConvexBody::axis_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        prop_assert!((anisotropic_perimeter(&k, &l).unwrap() - 2.0 * (a + b)).abs() < 1e-10);
    }
}

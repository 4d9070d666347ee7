mod common;

use common::surrounding_set;
use frontlab::geometry::*;
use frontlab::Exec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec())
}

fn residual(points: &[Point], weights: &[f64]) -> f64 {
    let d = points[0].dim();
    let mut r = vec![0.0; d];
    for (x, w) in points.iter().zip(weights) {
        for a in 0..d {
            r[a] += w * x[a];
        }
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn brute_force_in_hull_2d(points: &[Point], q: &[f64]) -> bool {
    // Some triangle (or segment) of the set contains q.
    let n = points.len();
    let cross = |a: &Point, b: &Point, c: &[f64]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let (a, b, c) = (&points[i], &points[j], &points[k]);
                let s1 = cross(a, b, q);
                let s2 = cross(b, c, q);
                let s3 = cross(c, a, q);
                let tol = 1e-12;
                let neg = s1 < -tol || s2 < -tol || s3 < -tol;
                let pos = s1 > tol || s2 > tol || s3 > tol;
                if !(neg && pos) {
                    // Degenerate triangles need an on-segment check.
                    let area = cross(a, b, c).abs();
                    if area > 1e-12 {
                        return true;
                    }
                    for (u, v) in [(a, b), (b, c), (a, c)] {
                        let len2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2);
                        let t = if len2 > 0.0 {
                            (((q[0] - u[0]) * (v[0] - u[0]) + (q[1] - u[1]) * (v[1] - u[1])) / len2)
                                .clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        let dx = u[0] + t * (v[0] - u[0]) - q[0];
                        let dy = u[1] + t * (v[1] - u[1]) - q[1];
                        if (dx * dx + dy * dy).sqrt() < 1e-9 {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

#[test]
fn cone_membership_table() {
    let cone = Cone::new(p(&[1.0, 0.0]), 0.5).unwrap();
    assert!(cone_membership(&p(&[1.0, 0.0]), &cone).unwrap());
    assert!(cone_membership(&p(&[0.0, 0.0]), &cone).unwrap());
    assert!(!cone_membership(&p(&[0.0, 1.0]), &cone).unwrap());
    // Boundary ray at 60 degrees.
    let b = p(&[0.5, 3f64.sqrt() / 2.0]);
    assert!(cone_membership(&b, &cone).unwrap());
    assert!(Cone::new(p(&[0.0, 0.0]), 0.5).is_err());
    assert!(Cone::new(p(&[1.0, 0.0]), 1.5).is_err());
}

#[test]
fn separation_of_clear_cases() {
    let sep = separating_direction(&[p(&[1.0, 0.0]), p(&[0.0, 1.0])])
        .unwrap()
        .unwrap();
    assert!((sep.direction[0] - sep.direction[1]).abs() < 1e-12);
    assert!((sep.margin - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(separating_direction(&[p(&[1.0, 0.0]), p(&[-1.0, 0.0])])
        .unwrap()
        .is_none());
    let tri = [p(&[1.0, 0.0]), p(&[-0.5, 0.8]), p(&[-0.5, -0.8])];
    assert!(separating_direction(&tri).unwrap().is_none());
}

#[test]
fn min_norm_point_of_segment() {
    let mn = min_norm_point(&[p(&[1.0, 1.0]), p(&[1.0, -1.0])]).unwrap();
    assert!((mn.point[0] - 1.0).abs() < 1e-12 && mn.point[1].abs() < 1e-12);
    assert!((mn.weights[0] - 0.5).abs() < 1e-12);
}

#[test]
fn inputs_are_checked() {
    assert_eq!(min_norm_point(&[]).unwrap_err(), GeometryError::EmptyInput);
    assert!(matches!(
        min_norm_point(&[p(&[1.0]), p(&[1.0, 2.0])]),
        Err(GeometryError::DimensionMismatch { .. })
    ));
    assert_eq!(
        min_norm_point(&[p(&[f64::NAN])]).unwrap_err(),
        GeometryError::NonFinite
    );
    assert_eq!(
        caratheodory_reduce(&[p(&[1.0, 0.0]), p(&[0.0, 1.0])], &[0.0, 0.0]).unwrap_err(),
        GeometryError::NotInterior
    );
}

#[test]
fn equilateral_triangle_wiggle_survives_perturbation() {
    let tri: Vec<Point> = [90f64, 210.0, 330.0]
        .iter()
        .map(|a| p(&[a.to_radians().cos(), a.to_radians().sin()]))
        .collect();
    let cert = wiggle_radius(&tri).unwrap();
    assert!((cert.interior_radius - 0.5).abs() < 1e-12);
    assert!(cert.epsilon > 0.0 && cert.epsilon <= 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rep = cert
        .validate(&tri, 10_000, &mut rng, Exec::default())
        .unwrap();
    assert_eq!(rep.failures, 0);
}

#[test]
fn hull_membership_matches_triangle_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(1..7);
        let pts: Vec<Point> = (0..n)
            .map(|_| p(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]))
            .collect();
        let q = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        assert_eq!(
            hull_contains(&pts, &q).unwrap(),
            brute_force_in_hull_2d(&pts, &q),
            "{pts:?} {q:?}"
        );
    }
}

#[test]
fn caratheodory_reduces_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200 {
        let d = 2 + i % 2;
        let extra = rng.random_range(0..6);
        let pts = surrounding_set(&mut rng, d, extra);
        let idx = caratheodory_reduce(&pts, &vec![0.0; d]).unwrap();
        assert!(idx.len() <= 2 * d);
        let sub: Vec<Point> = idx.iter().map(|&k| pts[k].clone()).collect();
        assert!(is_interior(&sub, &vec![0.0; d]).unwrap());
    }
}

#[test]
fn positive_combination_residuals_are_tiny() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..100 {
        let d = 2 + i % 3;
        let extra = rng.random_range(0..5);
        let pts = surrounding_set(&mut rng, d, extra);
        let c = positive_combination(&pts).unwrap();
        assert!(c.iter().all(|v| *v > 0.0));
        let scale: f64 = pts.iter().zip(&c).map(|(x, w)| w * x.norm()).sum();
        assert!(residual(&pts, &c) <= 1e-9 * scale);
    }
}

#[test]
fn interior_radius_matches_facet_sampling_in_2d() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let pts = surrounding_set(&mut rng, 2, 3);
        let r = interior_radius(&pts).unwrap();
        // The ball of radius r lies in the hull, slightly larger balls do not.
        for k in 0..64 {
            let a = k as f64 / 64.0 * std::f64::consts::TAU;
            assert!(hull_contains(&pts, &[0.999 * r * a.cos(), 0.999 * r * a.sin()]).unwrap());
        }
        let escapes = (0..4096).any(|k| {
            let a = k as f64 / 4096.0 * std::f64::consts::TAU;
            !hull_contains(&pts, &[1.01 * r * a.cos(), 1.01 * r * a.sin()]).unwrap()
        });
        assert!(escapes);
    }
}

#[test]
fn hull_vertices_drop_interior_points() {
    let pts = [
        p(&[0.0, 0.0]),
        p(&[1.0, 0.0]),
        p(&[0.0, 1.0]),
        p(&[0.2, 0.2]),
        p(&[1.0, 0.0]),
    ];
    assert_eq!(hull_vertices(&pts).unwrap(), vec![0, 1, 2]);
}

#[test]
fn a_point_at_the_query_does_not_hide_interiority() {
    let pts = [
        p(&[0.019580804311573385, 0.10111964306505561]),
        p(&[-0.1797535565215468, -0.1281961113620631]),
        p(&[0.8149646915985875, 0.0029469104677535274]),
        p(&[-0.17903252851092588, 0.07148247023489218]),
        p(&[0.0, 0.0]),
    ];
    assert!(is_interior(&pts, &[0.0, 0.0]).unwrap());
    for q in [[1e-9, 0.0], [0.0, -1e-9]] {
        assert!(hull_contains(&pts, &q).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_norm_point_is_optimal(coords in prop::collection::vec(-2.0f64..2.0, 2..=16)) {
        let pts: Vec<Point> = coords.chunks(2).filter(|c| c.len() == 2).map(p).collect();
        prop_assume!(!pts.is_empty());
        let mn = min_norm_point(&pts).unwrap();
        let w_sum: f64 = mn.weights.iter().sum();
        prop_assert!((w_sum - 1.0).abs() < 1e-9);
        prop_assert!(mn.weights.iter().all(|w| *w >= -1e-12));
        // Optimality: x·(y − x) ≥ 0 for every hull point y.
        let x = Point::new(mn.point.to_vec());
        let n2 = x.dot(&x);
        for y in &pts {
            prop_assert!(x.dot(y) >= n2 - 1e-9);
        }
    }

    #[test]
    fn separation_direction_separates(coords in prop::collection::vec(-2.0f64..2.0, 3..=18)) {
        let pts: Vec<Point> = coords.chunks(3).filter(|c| c.len() == 3).map(p).collect();
        prop_assume!(!pts.is_empty());
        match separating_direction(&pts).unwrap() {
            Some(sep) => {
                prop_assert!((sep.direction.norm() - 1.0).abs() < 1e-12);
                for x in &pts {
                    prop_assert!(x.dot(&sep.direction) >= sep.margin - 1e-9);
                }
                prop_assert!(sep.margin > 0.0);
            }
            None => prop_assert!(hull_contains(&pts, &[0.0, 0.0, 0.0]).unwrap()),
        }
    }

    #[test]
    fn hull_contains_its_points_and_centroid(coords in prop::collection::vec(-3.0f64..3.0, 2..=12)) {
        let pts: Vec<Point> = coords.chunks(2).filter(|c| c.len() == 2).map(p).collect();
        prop_assume!(!pts.is_empty());
        for x in &pts {
            prop_assert!(hull_contains(&pts, x).unwrap());
        }
        let n = pts.len() as f64;
        let c = [pts.iter().map(|x| x[0]).sum::<f64>() / n, pts.iter().map(|x| x[1]).sum::<f64>() / n];
        prop_assert!(hull_contains(&pts, &c).unwrap());
    }

    #[test]
    fn wiggle_certificate_is_positive(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = surrounding_set(&mut rng, 2, (seed % 3) as usize);
        let cert = wiggle_radius(&pts).unwrap();
        prop_assert!(cert.epsilon > 0.0);
        prop_assert!(cert.epsilon <= cert.interior_radius);
        let rep = cert.validate(&pts, 200, &mut rng, Exec::Sequential).unwrap();
        prop_assert_eq!(rep.failures, 0);
    }
}

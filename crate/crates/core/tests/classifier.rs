mod common;

use frontlab::classifier::*;
use frontlab::geometry::{is_interior, Point};
use frontlab::pde::HTable;
use frontlab::{AtomicMeasure, Exec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mu(d: usize, atoms: &[(&[f64], f64)]) -> AtomicMeasure {
    AtomicMeasure::from_atoms(d, atoms).unwrap()
}

fn triangle() -> AtomicMeasure {
    let pts: Vec<Vec<f64>> = [90f64, 210.0, 330.0]
        .iter()
        .map(|a| vec![0.5 * a.to_radians().cos(), 0.5 * a.to_radians().sin()])
        .collect();
    let pairs: Vec<(&[f64], f64)> = pts.iter().map(|p| (p.as_slice(), 1.0)).collect();
    mu(2, &pairs)
}

fn rational_h() -> HTable {
    let mut knots = frontlab::pde::htable::default_knots(4);
    knots.extend([9.0, 1.0 / 9.0]);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    HTable::from_fn(&knots, |v| v / (1.0 + v)).unwrap()
}

#[test]
fn verdicts_match_the_direction_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for i in 0..60 {
        let d = 2 + i % 2;
        let m = common::random_measure(&mut rng, d, 8);
        let dirs = common::sphere_directions(d, 20_000);
        let got = classify(&m).unwrap().verdict;
        assert_eq!(
            got,
            common::brute_force_verdict(&m, &dirs),
            "{}",
            m.to_json()
        );
    }
}

#[test]
fn only_origin_is_h2_with_a_default_cone() {
    let c = classify(&mu(2, &[(&[0.0, 0.0], 1.0)])).unwrap();
    assert_eq!(c.verdict, Verdict::H2Neither);
    assert_eq!(c.cone().unwrap().0 .0, vec![1.0, 0.0]);
}

#[test]
fn edge_with_origin_atom_is_flagged() {
    let c = classify(&mu(
        2,
        &[(&[0.0, 0.0], 1.0), (&[0.5, 0.0], 1.0), (&[-0.5, 0.0], 1.0)],
    ))
    .unwrap();
    assert_eq!(c.verdict, Verdict::HalfSpaceEdge);
    match c.certificate {
        Certificate::Edge {
            origin_in_support,
            note,
            ..
        } => {
            assert!(origin_in_support);
            assert_eq!(note, EDGE_NOTE_ON_SUPPORT);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn origin_atom_inside_a_surrounding_set_is_h3() {
    let m = mu(
        2,
        &[
            (&[0.019580804311573385, 0.10111964306505561], 1.0),
            (&[-0.1797535565215468, -0.1281961113620631], 1.0),
            (&[0.8149646915985875, 0.0029469104677535274], 1.0),
            (&[-0.17903252851092588, 0.07148247023489218], 1.0),
            (&[0.0, 0.0], 0.9),
        ],
    );
    assert_eq!(classify(&m).unwrap().verdict, Verdict::H3BoundedNotFront);
    let no_origin = classify(&mu(1, &[(&[0.5], 1.0)])).unwrap();
    assert_eq!(no_origin.origin_weight.to_bits(), 0.0f64.to_bits());
}

#[test]
fn verdict_json_uses_the_published_names() {
    let c = classify(&mu(1, &[(&[0.0], 1.0), (&[0.5], 1.0)])).unwrap();
    let json = serde_json::to_value(&c).unwrap();
    assert_eq!(json["verdict"], "H2_Neither");
    assert_eq!(json["certificate"]["kind"], "cone");
}

#[test]
fn h3_witness_is_small_and_interior() {
    let m = triangle();
    let c = classify(&m).unwrap();
    assert_eq!(c.verdict, Verdict::H3BoundedNotFront);
    let Certificate::Interior { indices, witness } = c.certificate else {
        panic!("expected an interior witness");
    };
    assert!(indices.len() <= 4);
    assert!(is_interior(&witness, &[0.0, 0.0]).unwrap());
}

#[test]
fn triangle_constants_match_the_direction_scan() {
    let m = triangle();
    let exact = structure_constants(&m, Exec::default()).unwrap();
    assert_eq!(exact.method, ConstantsMethod::Exact);
    let dirs = common::sphere_directions(2, 100_000);
    assert!((exact.a_star - common::grid_cutout_min(&m, &dirs, 0.0)).abs() <= 1e-9);
    let r = 1.0 / exact.n as f64;
    assert!((exact.b_star - common::grid_cutout_min(&m, &dirs, r)).abs() <= 1e-9);
    if exact.n > 1 {
        let prev = 1.0 / (exact.n - 1) as f64;
        assert!(common::grid_cutout_min(&m, &dirs, prev) <= 1e-9);
    }
}

#[test]
fn h3_certificate_intermediates_satisfy_their_identities() {
    let h = rational_h();
    let c = certified_width_bound(&triangle(), 0.1, &h, Exec::default()).unwrap();
    let im = &c.intermediates;
    let g = |k: &str| im[k];
    let hi = h.h_inv(0.9).unwrap();
    assert_eq!(g("h_inv_1_minus_eps"), hi);
    assert!((g("a") - 0.05 * cap_fraction(2)).abs() < 1e-12);
    assert!((g("K") - 3.0 * g("N").powi(2)).abs() < 1e-12);
    assert!((g("T") - (hi / g("b_star")).ln()).abs() < 1e-12);
    let lr = (g("a") / g("mass")).ln().abs();
    assert!((g("T_a") - g("T").max(1.0 + lr)).abs() < 1e-12);
    assert!((g("delta_a") - (1.0 - lr / g("T_a")) / g("K")).abs() < 1e-12);
    assert!((g("L_minus") - 2.0 / g("delta_a") * (hi / g("a")).ln()).abs() < 1e-9);
    let lp = g("N").powi(2) * ((hi / g("b_star")).ln().abs() + 2.0 * g("T_a"));
    assert!((g("L_plus") - lp).abs() < 1e-9);
    assert_eq!(c.l_eps.unwrap(), g("L_minus").max(g("L_plus")));
    assert!(c.conditional_on_h);
    assert_eq!(c.h_table_id, h.id());
}

#[test]
fn h2_has_no_finite_bound() {
    let c = certified_width_bound(
        &mu(1, &[(&[0.0], 1.0), (&[0.5], 1.0)]),
        0.1,
        &rational_h(),
        Exec::Sequential,
    )
    .unwrap();
    assert_eq!(c.l_eps, None);
    assert!((c.intermediates["t0"] - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn edge_has_no_bound() {
    let m = mu(2, &[(&[0.5, 0.0], 1.0), (&[-0.5, 0.0], 1.0)]);
    assert!(matches!(
        certified_width_bound(&m, 0.1, &rational_h(), Exec::Sequential),
        Err(ClassifierError::NoBound(Verdict::HalfSpaceEdge))
    ));
}

#[test]
fn missing_h_range_is_reported() {
    let h = HTable::from_fn(&[0.0, 1.0, 2.0], |v| v / (1.0 + v)).unwrap();
    assert!(matches!(
        certified_width_bound(&mu(1, &[(&[0.5], 1.0)]), 0.1, &h, Exec::Sequential),
        Err(ClassifierError::HTable(_))
    ));
}

#[test]
fn divergence_diagnostic_bounds_the_outer_part() {
    let m = mu(1, &[(&[0.0], 1.0), (&[0.5], 1.0)]);
    let times = [0.0, 1.0, 2.0, 5.0, 10.0, 20.0];
    let d = h2_divergence_diagnostic(&m, 0.1, 0.25, &times, &rational_h()).unwrap();
    assert!((d.delta_prime - 0.25 / 6.0).abs() < 1e-15);
    assert_eq!(d.t0, Some(2f64.ln()));
    for s in &d.samples {
        assert!(s.v1 <= (-s.t).exp() * (1.0 + 1e-12), "t = {}", s.t);
    }
    assert!(d.v1_decreasing && d.v3_increasing);
    assert!(d.s_exceeds_r_everywhere && d.v1_bound_everywhere);
    assert!(matches!(
        h2_divergence_diagnostic(&triangle(), 0.1, 0.25, &times, &rational_h()),
        Err(ClassifierError::NotH2(_))
    ));
}

#[test]
fn cap_fraction_matches_monte_carlo_in_3d() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 200_000;
    let mut hit = 0;
    let mut total = 0;
    while total < n {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r < 1.0 {
            total += 1;
            if x[2] >= 0.5 * r {
                hit += 1;
            }
        }
    }
    assert!((hit as f64 / n as f64 - cap_fraction(3)).abs() < 0.005);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn best_cone_is_feasible_and_maximal_in_2d(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_measure(&mut rng, 2, 6);
        prop_assume!(!m.nonzero_atoms().is_empty());
        let (z, alpha) = best_cone(&m).unwrap();
        prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        for a in m.nonzero_atoms() {
            prop_assert!(a.xi.dot(&z) >= alpha * a.xi.norm() - 1e-12);
        }
        let dirs = common::sphere_directions(2, 20_000);
        let units: Vec<Point> = m.nonzero_atoms().iter().map(|a| a.xi.normalized().unwrap()).collect();
        let scan = dirs.iter().map(|d| units.iter().map(|u| u.dot(d)).fold(f64::INFINITY, f64::min)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(alpha >= scan - 1e-12);
    }

    #[test]
    fn classification_is_rotation_invariant(seed in 0u64..100_000, angle in 0.0f64..std::f64::consts::TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_measure(&mut rng, 2, 6);
        let (c, s) = (angle.cos(), angle.sin());
        let r = m.mapped(&[c, -s, s, c]).unwrap();
        let a = classify(&m).unwrap();
        let b = classify(&r).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        if let (Some((_, x)), Some((_, y))) = (a.cone(), b.cone()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_constants_never_exceed_the_grid(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_measure(&mut rng, 2, 7);
        prop_assume!(classify(&m).unwrap().verdict == Verdict::H3BoundedNotFront);
        let exact = structure_constants(&m, Exec::Sequential).unwrap();
        let grid = structure_constants_grid(&m, 4096, Exec::Sequential).unwrap();
        prop_assert!(exact.a_star <= grid.a_star + 1e-12);
        prop_assert!(exact.n >= grid.n);
    }
}

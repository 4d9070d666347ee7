//! Oracles shared by the integration tests.
#![allow(dead_code)]

use frontlab::classifier::Verdict;
use frontlab::geometry::{interior_radius, is_interior, Point};
use frontlab::AtomicMeasure;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `count` unit directions: equally spaced angles in d = 2, a Fibonacci
/// lattice in d = 3.
pub fn sphere_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => panic!("oracle directions only for d = 2, 3"),
    }
}

/// Verdict from `max_ζ min_i ξ_i·ζ/|ξ_i|` over nonzero atoms on a direction
/// grid, plus the origin-atom flag.
pub fn brute_force_verdict(mu: &AtomicMeasure, dirs: &[Vec<f64>]) -> Verdict {
    let units: Vec<Vec<f64>> = mu
        .nonzero_atoms()
        .iter()
        .map(|a| {
            let n = a.xi.norm();
            a.xi.iter().map(|c| c / n).collect()
        })
        .collect();
    let best = dirs
        .iter()
        .map(|z| {
            units
                .iter()
                .map(|u| u.iter().zip(z).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let origin = mu.origin_weight() > 0.0;
    if best > 0.0 {
        if origin {
            Verdict::H2Neither
        } else {
            Verdict::H1FrontAndBounded
        }
    } else if best < 0.0 {
        Verdict::H3BoundedNotFront
    } else {
        Verdict::HalfSpaceEdge
    }
}

/// Up to `max_atoms` atoms uniform in the ball of radius 0.95; with
/// probability ¼ one of them sits at the origin.
pub fn random_measure(rng: &mut ChaCha8Rng, d: usize, max_atoms: usize) -> AtomicMeasure {
    let n = rng.random_range(1..=max_atoms);
    let with_origin = n > 1 && rng.random_bool(0.25);
    let mut atoms: Vec<(Vec<f64>, f64)> = Vec::new();
    while atoms.len() < n - usize::from(with_origin) {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.95..0.95)).collect();
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r < 0.95 && r > 1e-3 {
            atoms.push((x, rng.random_range(0.1..2.0)));
        }
    }
    if with_origin {
        atoms.push((vec![0.0; d], rng.random_range(0.1..2.0)));
    }
    let pairs: Vec<(&[f64], f64)> = atoms.iter().map(|(x, w)| (x.as_slice(), *w)).collect();
    AtomicMeasure::from_atoms(d, &pairs).unwrap()
}

/// Minimum over `dirs` of `Σ w_i [ξ_i·ζ < -r|ξ_i|, |ξ_i| > r]`, the mass of
/// the open cone of half-angle `arccos r` around `-ζ` outside `B_r`.
pub fn grid_cutout_min(mu: &AtomicMeasure, dirs: &[Vec<f64>], r: f64) -> f64 {
    dirs.iter()
        .map(|z| {
            mu.atoms()
                .iter()
                .filter(|a| a.xi.norm() > r)
                .filter(|a| a.xi.iter().zip(z).map(|(x, y)| x * y).sum::<f64>() < -r * a.xi.norm())
                .map(|a| a.weight)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Centred random clouds whose hull holds a ball of radius 0.05.
pub fn surrounding_set(rng: &mut ChaCha8Rng, d: usize, extra: usize) -> Vec<Point> {
    loop {
        let mut pts: Vec<Point> = (0..d + 1 + extra)
            .map(|_| Point::new((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let centroid: Vec<f64> = (0..d)
            .map(|a| pts.iter().map(|x| x[a]).sum::<f64>() / pts.len() as f64)
            .collect();
        for x in pts.iter_mut() {
            *x = x.sub(&centroid);
        }
        if is_interior(&pts, &vec![0.0; d]).unwrap() && interior_radius(&pts).unwrap() > 0.05 {
            return pts;
        }
    }
}

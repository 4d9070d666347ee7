//! Convex geometry over finite point sets in direction space.
//!
//! Everything here is built on one primitive, the minimum-norm point of a
//! convex hull ([`min_norm_point`]), computed with Wolfe's active-set method.
//! Separation, hull membership, interiority, Carathéodory-type reduction and
//! the hull-stability certificate are thin layers on top of it.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::numerics::{dot, norm};

/// Relative tolerance under which a min-norm point counts as the origin.
pub const ORIGIN_TOL: f64 = 1e-12;
/// Relative probe radius used by the interiority test.
pub const INTERIOR_PROBE: f64 = 1e-9;
/// Positions closer than this are treated as the same point.
pub const DUPLICATE_TOL: f64 = 1e-12;

const MNP_GAP_TOL: f64 = 1e-12;
const POSITIVE_WEIGHT: f64 = 1e-15;
/// Above this many candidate subsets, `caratheodory_reduce` first shrinks the
/// set greedily to an inclusion-minimal one.
const MAX_ENUMERATED_SUBSETS: u128 = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("empty point set")]
    EmptyInput,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("point is not in the interior of the convex hull")]
    NotInterior,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// A point (or direction) in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// The `j`-th standard basis vector of R^d.
    pub fn basis(d: usize, j: usize) -> Self {
        let mut p = Self::zeros(d);
        p.0[j] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn sub(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self / |self|`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// `W_{α,ζ} = {x : x·ζ ≥ α|x|}`. With α = 0 this is the closed half-space with
/// inner normal ζ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub axis: Point,
    pub aperture: f64,
}

impl Cone {
    pub fn new(axis: Point, aperture: f64) -> Result<Self> {
        if !axis.is_finite() || !aperture.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if (axis.norm() - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidCone(format!(
                "axis norm {} is not 1",
                axis.norm()
            )));
        }
        if !(0.0..=1.0).contains(&aperture) {
            return Err(GeometryError::InvalidCone(format!(
                "aperture {aperture} outside [0, 1]"
            )));
        }
        Ok(Cone { axis, aperture })
    }

    /// Normalises `direction` before building the cone.
    pub fn from_direction(direction: &Point, aperture: f64) -> Result<Self> {
        let axis = direction
            .normalized()
            .ok_or_else(|| GeometryError::InvalidCone("zero axis".into()))?;
        Cone::new(axis, aperture)
    }
}

pub fn cone_membership(x: &Point, cone: &Cone) -> Result<bool> {
    if x.dim() != cone.axis.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: cone.axis.dim(),
            found: x.dim(),
        });
    }
    if !x.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let r = x.norm();
    Ok(x.dot(&cone.axis) >= cone.aperture * r - 1e-14 * (1.0 + r))
}

fn check_points(points: &[Point]) -> Result<usize> {
    let first = points.first().ok_or(GeometryError::EmptyInput)?;
    let d = first.dim();
    if d == 0 {
        return Err(GeometryError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for p in points {
        if p.dim() != d {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
    }
    Ok(d)
}

fn translate(points: &[Point], by: &[f64]) -> Vec<Point> {
    points.iter().map(|p| p.sub(by)).collect()
}

fn max_norm(points: &[Point]) -> f64 {
    points.iter().map(|p| p.norm()).fold(0.0, f64::max)
}

/// Indices of the first occurrence of every distinct point.
pub fn dedup_indices(points: &[Point]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let scale = 1.0 + p.norm();
        if !keep
            .iter()
            .any(|&k| norm(&points[k].sub(p)) <= DUPLICATE_TOL * scale)
        {
            keep.push(i);
        }
    }
    keep
}

/// Minimum-norm point of a convex hull together with its convex weights.
#[derive(Debug, Clone)]
pub struct MinNorm {
    pub point: Vec<f64>,
    /// One weight per input point; nonnegative, summing to one.
    pub weights: Vec<f64>,
    /// Final duality gap `|a|² - min_i x_i·a`.
    pub gap: f64,
}

impl MinNorm {
    pub fn norm(&self) -> f64 {
        norm(&self.point)
    }
}

/// Minimiser of `|Σ α_k p_k|` subject to `Σ α_k = 1` over the active points.
fn affine_minimizer(points: &[Point], active: &[usize]) -> Vec<f64> {
    let m = active.len();
    if m == 1 {
        return vec![1.0];
    }
    let base = &points[active[0]];
    let d = base.dim();
    let dirs = DMatrix::from_fn(d, m - 1, |r, c| points[active[c + 1]][r] - base[r]);
    let rhs = DVector::from_fn(d, |r, _| -base[r]);
    let svd = dirs.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let beta = svd
        .solve(&rhs, 1e-13 * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(m - 1));
    let mut alpha = Vec::with_capacity(m);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta.iter());
    alpha
}

fn combine(points: &[Point], active: &[usize], lambda: &[f64], d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    for (&i, &l) in active.iter().zip(lambda) {
        for (xr, pr) in x.iter_mut().zip(points[i].iter()) {
            *xr += l * pr;
        }
    }
    x
}

/// Wolfe's minimum-norm-point algorithm over the convex hull of `points`.
///
/// Stops once the Frank-Wolfe duality gap drops below `1e-12 · max|p|²`.
pub fn min_norm_point(points: &[Point]) -> Result<MinNorm> {
    let d = check_points(points)?;
    let n = points.len();
    let scale2 = points.iter().map(|p| p.dot(p)).fold(0.0, f64::max);
    let i0 = (0..n)
        .min_by(|&a, &b| {
            points[a]
                .dot(&points[a])
                .total_cmp(&points[b].dot(&points[b]))
        })
        .unwrap_or(0);
    let mut weights = vec![0.0; n];
    if scale2 == 0.0 {
        weights[i0] = 1.0;
        return Ok(MinNorm {
            point: vec![0.0; d],
            weights,
            gap: 0.0,
        });
    }
    let gap_tol = MNP_GAP_TOL * scale2;
    let mut active = vec![i0];
    let mut lambda = vec![1.0];
    let mut x = points[i0].0.clone();
    let mut gap = f64::INFINITY;

    for _ in 0..(100 + 20 * n) {
        let xx = dot(&x, &x);
        let (j, pj_x) = (0..n)
            .map(|i| (i, points[i].dot(&x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        gap = xx - pj_x;
        if gap <= gap_tol || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let alpha = affine_minimizer(points, &active);
            if alpha.iter().all(|&a| a > POSITIVE_WEIGHT) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for k in 0..active.len() {
                if alpha[k] <= POSITIVE_WEIGHT {
                    let denom = lambda[k] - alpha[k];
                    if denom > 0.0 {
                        theta = theta.min(lambda[k] / denom);
                    }
                }
            }
            for k in 0..active.len() {
                lambda[k] = (1.0 - theta) * lambda[k] + theta * alpha[k];
            }
            let before = active.len();
            let mut kept_a = Vec::with_capacity(before);
            let mut kept_l = Vec::with_capacity(before);
            for (&i, &l) in active.iter().zip(&lambda) {
                if l > POSITIVE_WEIGHT {
                    kept_a.push(i);
                    kept_l.push(l);
                }
            }
            if kept_a.len() == before {
                // Numerical stall: drop the smallest weight.
                let kmin = (0..before)
                    .min_by(|&a, &b| lambda[a].total_cmp(&lambda[b]))
                    .expect("nonempty");
                kept_a.remove(kmin);
                kept_l.remove(kmin);
            }
            if kept_a.is_empty() {
                kept_a.push(j);
                kept_l.push(1.0);
            }
            let s: f64 = kept_l.iter().sum();
            kept_l.iter_mut().for_each(|l| *l /= s);
            active = kept_a;
            lambda = kept_l;
            if active.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        x = combine(points, &active, &lambda, d);
    }
    for (&i, &l) in active.iter().zip(&lambda) {
        weights[i] += l;
    }
    Ok(MinNorm {
        point: x,
        weights,
        gap,
    })
}

/// A strict separator `x·ζ ≥ margin > 0` for every point of the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub direction: Point,
    pub margin: f64,
}

/// Returns a direction ζ with `x·ζ ≥ margin` on every point, or `None` when
/// the origin lies in the convex hull. ζ is the normalised minimum-norm point
/// of the hull, which also maximises the margin. The margin must exceed
/// `ORIGIN_TOL · max|x|`: a small primal norm left by the solver's stopping
/// rule does not count as separation unless the dual bound confirms it.
pub fn separating_direction(points: &[Point]) -> Result<Option<Separation>> {
    let mnp = min_norm_point(points)?;
    let scale = max_norm(points);
    let a = mnp.norm();
    if a <= ORIGIN_TOL * scale {
        return Ok(None);
    }
    let direction = Point(mnp.point.iter().map(|v| v / a).collect());
    let margin = points
        .iter()
        .map(|p| p.dot(&direction))
        .fold(f64::INFINITY, f64::min);
    if margin <= ORIGIN_TOL * scale {
        return Ok(None);
    }
    Ok(Some(Separation { direction, margin }))
}

/// Whether `q ∈ ch(points)`: no direction separates `q` from the set by more
/// than the tolerance.
pub fn hull_contains(points: &[Point], q: &[f64]) -> Result<bool> {
    let d = check_points(points)?;
    if q.len() != d {
        return Err(GeometryError::DimensionMismatch {
            expected: d,
            found: q.len(),
        });
    }
    let shifted = translate(points, q);
    if max_norm(&shifted) == 0.0 {
        return Ok(true);
    }
    Ok(separating_direction(&shifted)?.is_none())
}

/// Whether `x ∈ int(ch(points))`: the origin of the translated set must be in
/// the hull, and so must the 2d probes `±ρ e_j` with `ρ = 1e-9 · max|p − x|`.
pub fn is_interior(points: &[Point], x: &[f64]) -> Result<bool> {
    let d = check_points(points)?;
    if x.len() != d {
        return Err(GeometryError::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let shifted = translate(points, x);
    let scale = max_norm(&shifted);
    if scale == 0.0 || shifted.len() <= d {
        return Ok(false);
    }
    if separating_direction(&shifted)?.is_some() {
        return Ok(false);
    }
    let rho = INTERIOR_PROBE * scale;
    for j in 0..d {
        for sign in [1.0, -1.0] {
            let probe = Point::basis(d, j).scaled(sign * rho);
            if !hull_contains(&shifted, &probe)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lexicographic k-subsets of `0..n`.
pub(crate) struct Combinations {
    idx: Vec<usize>,
    n: usize,
    first: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            idx: (0..k).collect(),
            n,
            first: true,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.idx.len();
        if k > self.n {
            return None;
        }
        if self.first {
            self.first = false;
            return Some(self.idx.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(self.idx.clone());
            }
        }
        None
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn subset(points: &[Point], idx: &[usize]) -> Vec<Point> {
    idx.iter().map(|&i| points[i].clone()).collect()
}

/// Shrinks `candidates` by dropping points (in index order) while `x` stays
/// interior. The result is inclusion-minimal, hence has at most 2d points.
fn greedy_minimal(points: &[Point], candidates: &[usize], x: &[f64]) -> Result<Vec<usize>> {
    let mut cur = candidates.to_vec();
    loop {
        let mut removed = false;
        let mut k = 0;
        while k < cur.len() {
            let mut trial = cur.clone();
            trial.remove(k);
            if is_interior(&subset(points, &trial), x)? {
                cur = trial;
                removed = true;
            } else {
                k += 1;
            }
        }
        if !removed {
            return Ok(cur);
        }
    }
}

/// Indices of a subset `S* ⊆ S` with `|S*| ≤ 2d` and `x ∈ int(ch(S*))`.
///
/// Subsets are enumerated by size (d+1 up to 2d) and lexicographically within
/// each size; the first interior one wins. Duplicate points are ignored.
pub fn caratheodory_reduce(points: &[Point], x: &[f64]) -> Result<Vec<usize>> {
    let d = check_points(points)?;
    let uniq = dedup_indices(points);
    if !is_interior(&subset(points, &uniq), x)? {
        return Err(GeometryError::NotInterior);
    }
    let total: u128 = (d + 1..=2 * d).map(|k| binomial(uniq.len(), k)).sum();
    let pool = if total > MAX_ENUMERATED_SUBSETS {
        greedy_minimal(points, &uniq, x)?
    } else {
        uniq
    };
    for size in d + 1..=(2 * d).min(pool.len()) {
        for combo in Combinations::new(pool.len(), size) {
            let idx: Vec<usize> = combo.iter().map(|&c| pool[c]).collect();
            if is_interior(&subset(points, &idx), x)? {
                return Ok(idx);
            }
        }
    }
    Err(GeometryError::NotInterior)
}

/// Lower bound on the largest δ with `B_δ ⊆ ch(points)` (origin centred).
///
/// Exact in d ≤ 3 (minimum facet distance by brute-force facet enumeration).
/// In higher dimension the axis radii `ρ_j` (largest ρ with `±ρ e_j` in the
/// hull) are found by bisection and the inradius of the cross-polytope they
/// span, `(Σ ρ_j^{-2})^{-1/2}`, is returned.
pub fn interior_radius(points: &[Point]) -> Result<f64> {
    let d = check_points(points)?;
    let origin = vec![0.0; d];
    if !is_interior(points, &origin)? {
        return Err(GeometryError::NotInterior);
    }
    let uniq = subset(points, &dedup_indices(points));
    match d {
        1 => {
            let hi = uniq.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            let lo = uniq.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            Ok(hi.min(-lo))
        }
        2 | 3 => Ok(facet_distance(&uniq, d)),
        _ => cross_polytope_radius(&uniq, d),
    }
}

fn facet_normal(pts: &[&Point], d: usize) -> Vec<f64> {
    if d == 2 {
        let e = pts[1].sub(pts[0]);
        vec![e[1], -e[0]]
    } else {
        let a = pts[1].sub(pts[0]);
        let b = pts[2].sub(pts[0]);
        vec![
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }
}

fn facet_distance(points: &[Point], d: usize) -> f64 {
    let scale = max_norm(points).max(f64::MIN_POSITIVE);
    let mut best = f64::INFINITY;
    for combo in Combinations::new(points.len(), d) {
        let pts: Vec<&Point> = combo.iter().map(|&i| &points[i]).collect();
        let n = facet_normal(&pts, d);
        let nn = norm(&n);
        if nn <= 1e-12 * scale.powi(d as i32 - 1) {
            continue;
        }
        let b = pts[0].dot(&n);
        let tol = 1e-12 * scale * nn;
        let below = points.iter().all(|p| p.dot(&n) <= b + tol);
        let above = points.iter().all(|p| p.dot(&n) >= b - tol);
        if below {
            best = best.min(b / nn);
        }
        if above {
            best = best.min(-b / nn);
        }
    }
    best
}

fn cross_polytope_radius(points: &[Point], d: usize) -> Result<f64> {
    let hi = max_norm(points);
    let mut inv_sq = 0.0;
    for j in 0..d {
        let mut rho_j = f64::INFINITY;
        for sign in [1.0, -1.0] {
            let (mut lo, mut up) = (0.0, hi);
            for _ in 0..60 {
                let mid = 0.5 * (lo + up);
                let probe = Point::basis(d, j).scaled(sign * mid);
                if hull_contains(points, &probe)? {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            rho_j = rho_j.min(lo);
        }
        if rho_j <= 0.0 {
            return Err(GeometryError::NotInterior);
        }
        inv_sq += 1.0 / (rho_j * rho_j);
    }
    Ok(1.0 / inv_sq.sqrt())
}

/// Strictly positive `c` with `Σ c_i x_i = 0`, assembled from the barycentric
/// weights of the origin plus δ-shifted representations of each `-δ x_i`.
pub fn positive_combination(points: &[Point]) -> Result<Vec<f64>> {
    let d = check_points(points)?;
    if !is_interior(points, &vec![0.0; d])? {
        return Err(GeometryError::NotInterior);
    }
    let base = min_norm_point(points)?.weights;
    let inner = interior_radius(points)?;
    let delta = 0.5 * inner / max_norm(points);
    let mut c: Vec<f64> = base.iter().map(|a| a + delta).collect();
    for xi in points {
        let target = xi.scaled(-delta);
        let rep = min_norm_point(&translate(points, &target))?.weights;
        for (cj, bij) in c.iter_mut().zip(&rep) {
            *cj += bij;
        }
    }
    Ok(c)
}

/// Certified perturbation radius for `0 ∈ ch(points)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiggleCertificate {
    /// Every `y_i ∈ B_ε(x_i)` keeps the origin in `ch(y)`.
    pub epsilon: f64,
    pub coefficients: Vec<f64>,
    pub interior_radius: f64,
    /// Entry bound keeping `det(I + E) > 0`.
    pub r_det: f64,
    /// Entry bound keeping every Cramer numerator positive.
    pub r_cramer: f64,
    pub r: f64,
}

/// Builds the perturbation certificate. With `|E_ij| ≤ r` the system
/// `(I + E)θ = c` has `‖E‖_∞ ≤ kr`, so `det(I + E) > 0` once `kr < 1` and
/// `‖θ − c‖_∞ ≤ kr/(1 − kr)·max c` stays below `min c` once
/// `kr < min c / (max c + min c)`. Half of the smaller bound is used and
/// `ε = r·δ`.
pub fn wiggle_radius(points: &[Point]) -> Result<WiggleCertificate> {
    let coefficients = positive_combination(points)?;
    let delta = interior_radius(points)?;
    let k = points.len() as f64;
    let cmin = coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = coefficients.iter().cloned().fold(0.0, f64::max);
    let r_det = 1.0 / k;
    let r_cramer = cmin / (k * (cmax + cmin));
    let r = 0.5 * r_det.min(r_cramer);
    Ok(WiggleCertificate {
        epsilon: r * delta,
        coefficients,
        interior_radius: delta,
        r_det,
        r_cramer,
        r,
    })
}

/// Outcome of a Monte-Carlo check of a [`WiggleCertificate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub trials: usize,
    pub failures: usize,
}

/// Uniform sample from the open ball of radius `r` in R^d (rejection).
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, d: usize, r: f64) -> Point {
    loop {
        let p: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let n2 = dot(&p, &p);
        if n2 < 1.0 {
            return Point(p.into_iter().map(|v| v * r).collect());
        }
    }
}

impl WiggleCertificate {
    /// Perturbs every point uniformly inside `B_ε` and checks that the origin
    /// stays in the hull. Perturbations are drawn sequentially from `rng`; the
    /// hull tests run under `exec`.
    pub fn validate<R: Rng + ?Sized>(
        &self,
        points: &[Point],
        trials: usize,
        rng: &mut R,
        exec: Exec,
    ) -> Result<PerturbationReport> {
        let d = check_points(points)?;
        let samples: Vec<Vec<Point>> = (0..trials)
            .map(|_| {
                points
                    .iter()
                    .map(|p| p.add(&sample_ball(rng, d, self.epsilon)))
                    .collect()
            })
            .collect();
        let origin = vec![0.0; d];
        let outcomes = exec.map(&samples, |ys| hull_contains(ys, &origin));
        let mut failures = 0;
        for o in outcomes {
            if !o? {
                failures += 1;
            }
        }
        Ok(PerturbationReport { trials, failures })
    }
}

/// Indices of the extreme points of `ch(points)` (duplicates collapsed onto
/// their first occurrence).
pub fn hull_vertices(points: &[Point]) -> Result<Vec<usize>> {
    check_points(points)?;
    let uniq = dedup_indices(points);
    if uniq.len() == 1 {
        return Ok(uniq);
    }
    let mut out = Vec::new();
    for (pos, &i) in uniq.iter().enumerate() {
        let others: Vec<Point> = uniq
            .iter()
            .enumerate()
            .filter(|&(q, _)| q != pos)
            .map(|(_, &k)| points[k].clone())
            .collect();
        if !hull_contains(&others, &points[i])? {
            out.push(i);
        }
    }
    Ok(out)
}

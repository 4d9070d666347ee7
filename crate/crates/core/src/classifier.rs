//! The front / bounded-width trichotomy for atomic measures.
//!
//! | verdict | condition on the atoms | behaviour of `u_μ` |
//! |---|---|---|
//! | `H1_FrontAndBounded` | `0 ∉ ch(μ)` | transition front with bounded width |
//! | `H2_Neither` | atom at 0, the others strictly inside a cone | width unbounded |
//! | `H3_BoundedNotFront` | `0 ∈ int ch(μ)` | bounded width, not a front |
//! | `HalfSpaceEdge` | `0 ∈ ∂ch(μ)` | bounded width if `0 ∉ supp μ`; front status open |
//!
//! Every width bound takes the [`HTable`] explicitly and is only as good as
//! that table: certificates are conditional on `h`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use thiserror::Error;

use crate::exec::Exec;
use crate::geometry::{self, binomial, Combinations, GeometryError, Point};
use crate::linfield::{self, LinField, SplitField};
use crate::measure::{support_geometry, AtomicMeasure};
use crate::numerics;
use crate::pde::htable::{HTable, HTableError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("measure has only the atom at the origin")]
    OnlyOriginAtom,
    #[error("structure constants require an H3 measure, got {0:?}")]
    NotH3(Verdict),
    #[error("divergence diagnostic requires an H2 measure, got {0:?}")]
    NotH2(Verdict),
    #[error("level {0} must lie in (0, 1/2)")]
    BadLevel(f64),
    #[error("width bound unavailable for verdict {0:?}")]
    NoBound(Verdict),
    #[error("no N up to {0} gives positive cut-out mass")]
    CutoffNotFound(u64),
    #[error(transparent)]
    HTable(#[from] HTableError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    LinField(#[from] linfield::LinFieldError),
}

pub type Result<T> = std::result::Result<T, ClassifierError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "H1_FrontAndBounded")]
    H1FrontAndBounded,
    #[serde(rename = "H2_Neither")]
    H2Neither,
    #[serde(rename = "H3_BoundedNotFront")]
    H3BoundedNotFront,
    HalfSpaceEdge,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::H1FrontAndBounded => "H1_FrontAndBounded",
            Verdict::H2Neither => "H2_Neither",
            Verdict::H3BoundedNotFront => "H3_BoundedNotFront",
            Verdict::HalfSpaceEdge => "HalfSpaceEdge",
        }
    }
}

/// Note attached to every `HalfSpaceEdge` verdict.
pub const EDGE_NOTE_OFF_SUPPORT: &str =
    "bounded width; front status = uncovered case (conjectured not a front)";
pub const EDGE_NOTE_ON_SUPPORT: &str =
    "undetermined: 0 lies on the hull boundary and in the support";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// All nonzero atoms lie in `W_{α,ζ}`.
    Cone { zeta: Point, alpha: f64 },
    /// A subset of at most `2d` atoms whose hull has 0 in its interior.
    Interior {
        indices: Vec<usize>,
        witness: Vec<Point>,
    },
    /// Supporting half-space `{x·ζ ≥ 0}` through the origin.
    Edge {
        zeta: Point,
        origin_in_support: bool,
        note: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub certificate: Certificate,
    /// `dist(supp μ, 0)`.
    pub delta: f64,
    pub origin_weight: f64,
}

impl Classification {
    pub fn cone(&self) -> Option<(&Point, f64)> {
        match &self.certificate {
            Certificate::Cone { zeta, alpha } => Some((zeta, *alpha)),
            _ => None,
        }
    }

    pub fn zeta(&self) -> Option<&Point> {
        match &self.certificate {
            Certificate::Cone { zeta, .. } | Certificate::Edge { zeta, .. } => Some(zeta),
            Certificate::Interior { .. } => None,
        }
    }
}

pub fn classify(mu: &AtomicMeasure) -> Result<Classification> {
    let d = mu.dim();
    let positions = mu.positions();
    let geo = support_geometry(mu);
    let origin_weight = mu.origin_weight();
    let nonzero: Vec<Point> = mu.nonzero_atoms().iter().map(|a| a.xi.clone()).collect();
    let mk = |verdict, certificate| Classification {
        verdict,
        certificate,
        delta: geo.delta,
        origin_weight,
    };

    if geometry::separating_direction(&positions)?.is_some() {
        let (zeta, alpha) = best_cone_of(&nonzero)?;
        return Ok(mk(
            Verdict::H1FrontAndBounded,
            Certificate::Cone { zeta, alpha },
        ));
    }
    if origin_weight > 0.0 {
        if nonzero.is_empty() {
            return Ok(mk(
                Verdict::H2Neither,
                Certificate::Cone {
                    zeta: Point::basis(d, 0),
                    alpha: 1.0,
                },
            ));
        }
        if geometry::separating_direction(&nonzero)?.is_some() {
            let (zeta, alpha) = best_cone_of(&nonzero)?;
            return Ok(mk(Verdict::H2Neither, Certificate::Cone { zeta, alpha }));
        }
    }
    let origin = vec![0.0; d];
    if geometry::is_interior(&positions, &origin)? {
        let indices = geometry::caratheodory_reduce(&positions, &origin)?;
        let witness = indices.iter().map(|&i| positions[i].clone()).collect();
        return Ok(mk(
            Verdict::H3BoundedNotFront,
            Certificate::Interior { indices, witness },
        ));
    }
    let origin_in_support = origin_weight > 0.0;
    let zeta = supporting_direction(&positions)?;
    Ok(mk(
        Verdict::HalfSpaceEdge,
        Certificate::Edge {
            zeta,
            origin_in_support,
            note: if origin_in_support {
                EDGE_NOTE_ON_SUPPORT
            } else {
                EDGE_NOTE_OFF_SUPPORT
            }
            .to_string(),
        },
    ))
}

/// Orthonormal basis of `span(vectors)`.
fn span_basis(vectors: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(d, vectors.len(), |r, c| vectors[c][r]);
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-10 * smax.max(f64::MIN_POSITIVE);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol)
        .map(|(k, _)| u.column(k).iter().cloned().collect())
        .collect()
}

fn project_out(x: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut y = x.to_vec();
    for b in basis {
        let c = numerics::dot(&y, b);
        for (yk, bk) in y.iter_mut().zip(b) {
            *yk -= c * bk;
        }
    }
    y
}

/// Direction `ζ` with `x·ζ ≥ 0` for every point when 0 lies on the hull
/// boundary: peel off the face through 0 and separate the rest in its
/// orthogonal complement.
fn supporting_direction(points: &[Point]) -> Result<Point> {
    let d = points[0].dim();
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mnp = geometry::min_norm_point(points)?;
    let mut face: Vec<Vec<f64>> = mnp
        .weights
        .iter()
        .zip(points)
        .filter(|(w, _)| **w > 0.0)
        .map(|(_, p)| p.0.clone())
        .collect();
    loop {
        let basis = span_basis(&face, d);
        let outside: Vec<Point> = points
            .iter()
            .map(|p| Point(project_out(p, &basis)))
            .filter(|q| q.norm() > 1e-10 * scale.max(1.0))
            .collect();
        if outside.is_empty() {
            let best = (0..d)
                .map(|j| Point(project_out(&Point::basis(d, j), &basis)))
                .enumerate()
                .fold((0, -1.0), |acc, (j, q)| {
                    let n = q.norm();
                    if n > acc.1 + 1e-12 {
                        (j, n)
                    } else {
                        acc
                    }
                })
                .0;
            let q = Point(project_out(&Point::basis(d, best), &basis));
            return Ok(q.normalized().unwrap_or_else(|| Point::basis(d, 0)));
        }
        if let Some(sep) = geometry::separating_direction(&outside)? {
            return Ok(sep.direction);
        }
        let inner = geometry::min_norm_point(&outside)?;
        let before = basis.len();
        face.extend(
            inner
                .weights
                .iter()
                .zip(&outside)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, q)| q.0.clone()),
        );
        if span_basis(&face, d).len() == before {
            // Numerically stuck; fall back to the mean outside direction.
            let mut m = vec![0.0; d];
            for q in &outside {
                for (mk, qk) in m.iter_mut().zip(q.iter()) {
                    *mk += qk;
                }
            }
            return Ok(Point(m).normalized().unwrap_or_else(|| Point::basis(d, 0)));
        }
    }
}

/// Maximin cone over the nonzero atoms of `μ`.
pub fn best_cone(mu: &AtomicMeasure) -> Result<(Point, f64)> {
    let nonzero: Vec<Point> = mu.nonzero_atoms().iter().map(|a| a.xi.clone()).collect();
    best_cone_of(&nonzero)
}

fn min_alignment(units: &[Point], zeta: &[f64]) -> f64 {
    units
        .iter()
        .map(|u| u.dot(zeta))
        .fold(f64::INFINITY, f64::min)
}

/// Lexicographically larger coordinate vector.
fn lex_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x > y;
        }
    }
    false
}

/// Upper limit on enumerated candidate subsets before falling back to ascent.
const MAX_SUBSETS: u128 = 200_000;

/// `argmax_ζ min_i (ξ_i·ζ)/|ξ_i|`.
///
/// With a positive optimum this equals the distance from 0 to the hull of the
/// unit directions and is read off the minimum-norm point. Otherwise every
/// local maximiser has an active set of at most `d` directions on which it is
/// `±` the normalised projection of a direction onto the orthogonal complement
/// of their pairwise differences, so those candidates are enumerated.
pub fn best_cone_of(points: &[Point]) -> Result<(Point, f64)> {
    if points.is_empty() {
        return Err(ClassifierError::OnlyOriginAtom);
    }
    let d = points[0].dim();
    let units: Vec<Point> = points.iter().filter_map(|p| p.normalized()).collect();
    if units.is_empty() {
        return Err(ClassifierError::OnlyOriginAtom);
    }
    if let Some(sep) = geometry::separating_direction(&units)? {
        let alpha = min_alignment(&units, &sep.direction);
        return Ok((sep.direction, alpha));
    }
    let keep = geometry::dedup_indices(&units);
    let units: Vec<Point> = keep.iter().map(|&i| units[i].clone()).collect();
    let n = units.len();
    let subsets: u128 = (1..=d.min(n)).map(|k| binomial(n, k)).sum();
    let candidates = if subsets <= MAX_SUBSETS {
        maximin_candidates(&units, d)
    } else {
        ascent_candidates(&units, d)
    };
    let mut best: Option<(Point, f64)> = None;
    for z in candidates {
        let f = min_alignment(&units, &z);
        best = match best {
            None => Some((z, f)),
            Some((bz, bf)) => {
                if f > bf + 1e-12 || ((f - bf).abs() <= 1e-12 && lex_greater(&z, &bz)) {
                    Some((z, f))
                } else {
                    Some((bz, bf))
                }
            }
        };
    }
    let (zeta, _) = best.expect("at least one candidate");
    let alpha = min_alignment(&units, &zeta);
    Ok((zeta, alpha))
}

fn maximin_candidates(units: &[Point], d: usize) -> Vec<Point> {
    let n = units.len();
    let mut out = Vec::new();
    for k in 1..=d.min(n) {
        for subset in Combinations::new(n, k) {
            let base = &units[subset[0]];
            let diffs: Vec<Vec<f64>> = subset[1..].iter().map(|&j| units[j].sub(base).0).collect();
            let w = span_basis(&diffs, d);
            let z = project_out(base, &w);
            if numerics::norm(&z) > 1e-12 {
                let z = Point(z).normalized().expect("nonzero");
                out.push(z.scaled(-1.0));
                out.push(z);
            } else {
                // 0 lies in the affine span: the common value is 0 on the
                // whole complement; sample its axis directions.
                for j in 0..d {
                    if let Some(q) = Point(project_out(&Point::basis(d, j), &w)).normalized() {
                        out.push(q.scaled(-1.0));
                        out.push(q);
                    }
                }
            }
        }
    }
    out
}

/// Projected supergradient ascent from the mean direction plus 32 seeded
/// restarts; used only when exact enumeration is too large.
fn ascent_candidates(units: &[Point], d: usize) -> Vec<Point> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut mean = vec![0.0; d];
    for u in units {
        for (m, c) in mean.iter_mut().zip(u.iter()) {
            *m += c;
        }
    }
    let mut starts = vec![Point(mean)
        .normalized()
        .unwrap_or_else(|| Point::basis(d, 0))];
    for _ in 0..32 {
        let g: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        starts.push(Point(g).normalized().unwrap_or_else(|| Point::basis(d, 0)));
    }
    starts
        .into_iter()
        .map(|mut z| {
            let mut best = (z.clone(), min_alignment(units, &z));
            let mut step = 0.5;
            for _ in 0..2000 {
                let (i, _) = units
                    .iter()
                    .enumerate()
                    .map(|(i, u)| (i, u.dot(&z)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty");
                z = z.add(&units[i].scaled(step)).normalized().unwrap_or(z);
                let f = min_alignment(units, &z);
                if f > best.1 {
                    best = (z.clone(), f);
                }
                step *= 0.997;
            }
            best.0
        })
        .collect()
}

/// `|Y_ζ|/|B_1|` for `Y_ζ = {ξ ∈ B_1 : ζ·ξ ≥ |ξ|/2}`: the solid-angle fraction
/// of the cap with half-angle 60°, `½ I_{3/4}((d-1)/2, ½)`.
pub fn cap_fraction(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    if d == 1 {
        return 0.5;
    }
    0.5 * beta_reg((d as f64 - 1.0) / 2.0, 0.5, 0.75)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantsMethod {
    /// Minimum over every vertex of the constraint arrangement.
    Exact,
    /// Minimum over a fixed set of directions.
    Grid { directions: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants {
    pub a_star: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub b_star: f64,
    pub method: ConstantsMethod,
}

/// `F(ζ) = Σ w_i [u_i·ζ < c_i]` with the inequality taken strictly (margin
/// `1e-12`) so that atoms on a constraint boundary are not counted.
struct CutoutMass {
    dirs: Vec<Point>,
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl CutoutMass {
    fn half_space(mu: &AtomicMeasure) -> Self {
        let atoms = mu.nonzero_atoms();
        CutoutMass {
            dirs: atoms
                .iter()
                .map(|a| a.xi.normalized().expect("nonzero"))
                .collect(),
            offsets: vec![0.0; atoms.len()],
            weights: atoms.iter().map(|a| a.weight).collect(),
        }
    }

    /// `μ(C_{N,ζ})` with `C_{N,ζ} = int(W_{1/N,-ζ} ∩ A(1/N, 1))`.
    fn cutout(mu: &AtomicMeasure, n: u64) -> Self {
        let r = 1.0 / n as f64;
        let atoms: Vec<_> = mu.atoms().iter().filter(|a| a.xi.norm() > r).collect();
        CutoutMass {
            dirs: atoms
                .iter()
                .map(|a| a.xi.normalized().expect("nonzero"))
                .collect(),
            offsets: vec![-r; atoms.len()],
            weights: atoms.iter().map(|a| a.weight).collect(),
        }
    }

    fn eval(&self, zeta: &[f64]) -> f64 {
        let mut s = numerics::NeumaierSum::new();
        for ((u, c), w) in self.dirs.iter().zip(&self.offsets).zip(&self.weights) {
            if u.dot(zeta) < c - 1e-12 {
                s += *w;
            }
        }
        s.value()
    }

    fn min_over(&self, candidates: &[Point], exec: Exec) -> f64 {
        exec.map(candidates, |z| self.eval(z))
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Points of every intersection of at most `d-1` constraint spheres
    /// `{u_i·ζ = c_i}` with the unit sphere. When an intersection is a whole
    /// sphere its axis points are taken; any point of an uncut sphere attains
    /// the same value.
    fn arrangement_vertices(&self, d: usize) -> Option<Vec<Point>> {
        let n = self.dirs.len();
        let kmax = (d - 1).min(n);
        let total: u128 = (0..=kmax).map(|k| binomial(n, k)).sum();
        if total > MAX_SUBSETS {
            return None;
        }
        let mut out = Vec::new();
        for k in 0..=kmax {
            for s in Combinations::new(n, k) {
                sphere_section(&self.dirs, &self.offsets, &s, d, &mut out);
            }
        }
        Some(out)
    }
}

fn sphere_section(
    dirs: &[Point],
    offsets: &[f64],
    subset: &[usize],
    d: usize,
    out: &mut Vec<Point>,
) {
    let k = subset.len();
    let (p0, null) = if k == 0 {
        (
            vec![0.0; d],
            (0..d).map(|j| Point::basis(d, j).0).collect::<Vec<_>>(),
        )
    } else {
        let a = DMatrix::from_fn(k, d, |r, c| dirs[subset[r]][c]);
        let b = DVector::from_fn(k, |r, _| offsets[subset[r]]);
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let Ok(x) = svd.solve(&b, 1e-12 * smax) else {
            return;
        };
        if (&a * &x - &b).norm() > 1e-9 {
            return;
        }
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| dirs[i].0.clone()).collect();
        let row_basis = span_basis(&rows, d);
        let mut null = Vec::new();
        for j in 0..d {
            let mut q = project_out(&Point::basis(d, j), &row_basis);
            q = project_out(&q, &null);
            let nq = numerics::norm(&q);
            if nq > 1e-8 {
                null.push(q.iter().map(|c| c / nq).collect());
            }
        }
        (x.iter().cloned().collect(), null)
    };
    let r2 = 1.0 - numerics::dot(&p0, &p0);
    if r2 < -1e-12 {
        return;
    }
    if r2 <= 1e-24 || null.is_empty() {
        if let Some(p) = Point(p0).normalized() {
            out.push(p);
        }
        return;
    }
    let r = r2.sqrt();
    for nb in &null {
        for sign in [1.0, -1.0] {
            let p: Vec<f64> = p0.iter().zip(nb).map(|(a, b)| a + sign * r * b).collect();
            if let Some(p) = Point(p).normalized() {
                out.push(p);
            }
        }
    }
}

/// Deterministic direction set: equally spaced angles in d = 2, a Fibonacci
/// lattice in d = 3, seeded Gaussian directions otherwise.
pub fn direction_grid(d: usize, count: usize) -> Vec<Point> {
    match d {
        1 => vec![Point(vec![1.0]), Point(vec![-1.0])],
        2 => (0..count)
            .map(|k| {
                let th = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                Point(vec![th.cos(), th.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    Point(vec![r * th.cos(), r * th.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = StdRng::seed_from_u64(0xd1e5);
            (0..count)
                .filter_map(|_| {
                    let g: Vec<f64> = (0..d)
                        .map(|_| {
                            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                            let u2: f64 = rng.random();
                            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                        })
                        .collect();
                    Point(g).normalized()
                })
                .collect()
        }
    }
}

const MAX_CUTOFF: u64 = 1 << 40;

fn constants_with<F>(
    mu: &AtomicMeasure,
    method: ConstantsMethod,
    min_of: F,
) -> Result<StructureConstants>
where
    F: Fn(&CutoutMass) -> f64,
{
    let a_star = min_of(&CutoutMass::half_space(mu));
    let b = |n: u64| min_of(&CutoutMass::cutout(mu, n));
    let mut hi = 1u64;
    while b(hi) <= 0.0 {
        if hi >= MAX_CUTOFF {
            return Err(ClassifierError::CutoffNotFound(MAX_CUTOFF));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // Invariant: b(lo) <= 0 (or lo = 0), b(hi) > 0.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if b(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(StructureConstants {
        a_star,
        n: hi,
        b_star: b(hi),
        method,
    })
}

fn require_h3(mu: &AtomicMeasure) -> Result<()> {
    let c = classify(mu)?;
    if c.verdict != Verdict::H3BoundedNotFront {
        return Err(ClassifierError::NotH3(c.verdict));
    }
    Ok(())
}

/// `a* = inf_ζ μ({ξ·ζ < 0})`, the smallest `N` with `inf_ζ μ(C_{N,ζ}) > 0`
/// and `b* = inf_ζ μ(C_{N,ζ})`. Both infima are attained at vertices of the
/// arrangement of constraint spheres, which are enumerated exactly; when the
/// arrangement is too large the grid variant is used instead.
pub fn structure_constants(mu: &AtomicMeasure, exec: Exec) -> Result<StructureConstants> {
    require_h3(mu)?;
    let d = mu.dim();
    let probe = CutoutMass::half_space(mu);
    if probe.arrangement_vertices(d).is_none() {
        return structure_constants_grid(mu, 100_000, exec);
    }
    constants_with(mu, ConstantsMethod::Exact, |f| {
        match f.arrangement_vertices(d) {
            Some(v) => f.min_over(&v, exec),
            None => f.min_over(&direction_grid(d, 100_000), exec),
        }
    })
}

/// Same constants from a fixed direction grid; an upper bound on the exact
/// infima that converges as the grid is refined.
pub fn structure_constants_grid(
    mu: &AtomicMeasure,
    directions: usize,
    exec: Exec,
) -> Result<StructureConstants> {
    require_h3(mu)?;
    let dirs = direction_grid(mu.dim(), directions);
    constants_with(
        mu,
        ConstantsMethod::Grid {
            directions: dirs.len(),
        },
        |f| f.min_over(&dirs, exec),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthCertificate {
    pub verdict: Verdict,
    pub epsilon: f64,
    /// `None` when the width is certified to be unbounded.
    #[serde(rename = "L_eps")]
    pub l_eps: Option<f64>,
    pub intermediates: BTreeMap<String, f64>,
    pub constants: Option<StructureConstants>,
    pub h_table_id: String,
    /// Every bound depends on the empirical table standing in for `h`.
    pub conditional_on_h: bool,
}

/// Certified `L_ε` with `Ω_ε(t) ⊆ B_{L_ε}(Ω_{1-ε}(t))` for all `t`.
pub fn certified_width_bound(
    mu: &AtomicMeasure,
    eps: f64,
    h: &HTable,
    exec: Exec,
) -> Result<WidthCertificate> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ClassifierError::BadLevel(eps));
    }
    let class = classify(mu)?;
    let mut im = BTreeMap::new();
    let mut constants = None;
    let hinv = |y: f64| h.h_inv(y).map_err(ClassifierError::from);
    let l_eps = match class.verdict {
        Verdict::H1FrontAndBounded => {
            let (_, alpha) = class.cone().expect("H1 carries a cone");
            let delta = class.delta;
            let hi = hinv(1.0 - eps)?;
            let s = (hi / eps).ln() / (alpha * delta);
            im.insert("alpha".into(), alpha);
            im.insert("delta".into(), delta);
            im.insert("h_inv_1_minus_eps".into(), hi);
            im.insert("s".into(), s);
            Some(s + 1.0)
        }
        Verdict::H2Neither => {
            let m0 = class.origin_weight;
            let t0 = (2.0 * m0).ln();
            im.insert("mu_origin".into(), m0);
            im.insert("t0".into(), t0);
            im.insert("stuck_level".into(), h.h(m0 * (-t0).exp()));
            None
        }
        Verdict::H3BoundedNotFront => {
            let sc = structure_constants(mu, exec)?;
            let d = mu.dim();
            let mass = mu.total_mass();
            let frac = cap_fraction(d);
            let a = 0.5 * eps * frac;
            let hi = hinv(1.0 - eps)?;
            let n2 = (sc.n as f64).powi(2);
            let k = 3.0 * n2;
            let t = (hi / sc.b_star).ln();
            let log_ratio = (a / mass).ln().abs();
            let t_a = t.max(1.0 + log_ratio);
            let delta_a = (1.0 - log_ratio / t_a) / k;
            let l_minus = 2.0 / delta_a * (hi / a).ln();
            let l_plus = n2 * ((hi / sc.b_star).ln().abs() + 2.0 * t_a);
            for (key, v) in [
                ("cap_fraction", frac),
                ("a", a),
                ("mass", mass),
                ("h_inv_1_minus_eps", hi),
                ("K", k),
                ("T", t),
                ("T_a", t_a),
                ("delta_a", delta_a),
                ("L_minus", l_minus),
                ("L_plus", l_plus),
                ("a_star", sc.a_star),
                ("b_star", sc.b_star),
                ("N", sc.n as f64),
            ] {
                im.insert(key.to_string(), v);
            }
            constants = Some(sc);
            Some(l_minus.max(l_plus))
        }
        Verdict::HalfSpaceEdge => return Err(ClassifierError::NoBound(class.verdict)),
    };
    Ok(WidthCertificate {
        verdict: class.verdict,
        epsilon: eps,
        l_eps,
        intermediates: im,
        constants,
        h_table_id: h.id(),
        conditional_on_h: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSample {
    pub t: f64,
    /// `r_t = (2/α) c_δ t`.
    pub r_t: f64,
    /// `v_1(t, Y(t))` over atoms with `|ξ| ≥ δ`.
    pub v1: f64,
    /// `v_3(t, Y(t))` over atoms with `|ξ| < δ'`.
    pub v3: f64,
    pub v: f64,
    /// Root of `v(t, sζ) = h^{-1}(ε)`, or `None` when `v > h^{-1}(ε)` on the
    /// whole bracket `|s| ≤ 10³`.
    pub s_t: Option<f64>,
    /// `s_t > r_t`, or, beyond the bracket, `v(t, Y(t)) > h^{-1}(ε)`.
    pub s_exceeds_r: bool,
    /// `v_1 ≤ μ(A(δ,1)) e^{-t}`.
    pub v1_bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic {
    pub zeta: Point,
    pub alpha: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub epsilon: f64,
    pub h_inv_eps: f64,
    /// `t_0 = ln(2 μ({0}))`; `v(-t_0, x) → ½` far along the axis.
    pub t0: Option<f64>,
    /// Any admissible `L_ε` must be at least `δ^{-1} ln 2`.
    pub lower_bound: f64,
    pub outer_mass: f64,
    pub samples: Vec<DivergenceSample>,
    pub v1_decreasing: bool,
    pub v3_increasing: bool,
    pub s_exceeds_r_everywhere: bool,
    pub v1_bound_everywhere: bool,
}

/// Half-width of the bracket used for `s_t`.
pub const ROOT_BRACKET: f64 = 1e3;

/// Evidence that no finite `L_ε` exists for an H2 measure, sampled at `times`.
pub fn h2_divergence_diagnostic(
    mu: &AtomicMeasure,
    eps: f64,
    delta: f64,
    times: &[f64],
    h: &HTable,
) -> Result<DivergenceDiagnostic> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(ClassifierError::BadLevel(eps));
    }
    let class = classify(mu)?;
    if class.verdict != Verdict::H2Neither {
        return Err(ClassifierError::NotH2(class.verdict));
    }
    let (zeta, alpha) = class.cone().expect("H2 carries a cone");
    let zeta = zeta.clone();
    let delta_prime = linfield::default_inner_radius(alpha, delta);
    let split = SplitField::new(mu, delta, delta_prime)?;
    let field = LinField::new(mu);
    let c_delta = linfield::wave_speed(delta)?;
    let h_inv_eps = h.h_inv(eps)?;
    let outer_mass = mu.mass_where(|a| a.xi.norm() >= delta);
    let m0 = class.origin_weight;
    let at = |s: f64| -> Vec<f64> { zeta.iter().map(|z| s * z).collect() };
    let log_target = h_inv_eps.ln();

    let samples: Vec<DivergenceSample> = times
        .iter()
        .map(|&t| {
            let r_t = 2.0 / alpha * c_delta * t;
            let y = at(r_t);
            let v1 = split.outer.value(t, &y);
            let v3 = split.core.value(t, &y);
            let v = field.value(t, &y);
            let g = |s: f64| field.log_value(t, &at(s)) - log_target;
            let s_t = if g(ROOT_BRACKET) > 0.0 || g(-ROOT_BRACKET) < 0.0 {
                None
            } else {
                numerics::decreasing_root(g, 0.0, ROOT_BRACKET, 200)
            };
            let s_exceeds_r = match s_t {
                Some(s) => s > r_t,
                None => v > h_inv_eps,
            };
            DivergenceSample {
                t,
                r_t,
                v1,
                v3,
                v,
                s_t,
                s_exceeds_r,
                v1_bound_ok: t < 0.0 || v1 <= outer_mass * (-t).exp() * (1.0 + 1e-12),
            }
        })
        .collect();
    let v1_decreasing = samples.windows(2).all(|w| w[1].v1 <= w[0].v1);
    let v3_increasing = samples.windows(2).all(|w| w[1].v3 > w[0].v3);
    let past_onset: Vec<&DivergenceSample> = samples.iter().filter(|s| s.t > 0.0).collect();
    Ok(DivergenceDiagnostic {
        alpha,
        delta,
        delta_prime,
        epsilon: eps,
        h_inv_eps,
        t0: (m0 > 0.0).then(|| (2.0 * m0).ln()),
        lower_bound: 2f64.ln() / delta,
        outer_mass,
        s_exceeds_r_everywhere: past_onset.iter().all(|s| s.s_exceeds_r),
        v1_bound_everywhere: samples.iter().all(|s| s.v1_bound_ok),
        samples,
        v1_decreasing,
        v3_increasing,
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu(d: usize, atoms: &[(&[f64], f64)]) -> AtomicMeasure {
        AtomicMeasure::from_atoms(d, atoms).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify(&mu(1, &[(&[0.5], 1.0)])).unwrap();
        assert_eq!(c.verdict, Verdict::H1FrontAndBounded);
        let (z, a) = c.cone().unwrap();
        assert_eq!(z.0, vec![1.0]);
        assert!((a - 1.0).abs() < 1e-12);

        let c = classify(&mu(2, &[(&[0.0, 0.0], 1.0), (&[0.5, 0.0], 1.0)])).unwrap();
        assert_eq!(c.verdict, Verdict::H2Neither);
        assert!((c.cone().unwrap().0 .0[0] - 1.0).abs() < 1e-12);

        let r = 0.4 / 2f64.sqrt();
        let c = classify(&mu(
            2,
            &[(&[0.5, 0.0], 1.0), (&[0.0, 0.5], 1.0), (&[-r, -r], 1.0)],
        ))
        .unwrap();
        assert_eq!(c.verdict, Verdict::H3BoundedNotFront);

        let c = classify(&mu(2, &[(&[0.5, 0.0], 1.0), (&[-0.5, 0.0], 1.0)])).unwrap();
        assert_eq!(c.verdict, Verdict::HalfSpaceEdge);
        match c.certificate {
            Certificate::Edge {
                zeta,
                origin_in_support,
                ..
            } => {
                assert!(!origin_in_support);
                assert!(zeta[0].abs() < 1e-12 && (zeta[1].abs() - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected certificate {other:?}"),
        }
    }

    #[test]
    fn best_cone_examples() {
        let (z, a) = best_cone(&mu(2, &[(&[0.5, 0.0], 1.0), (&[0.0, 0.5], 1.0)])).unwrap();
        let s = 0.5f64.sqrt();
        assert!((z[0] - s).abs() < 1e-12 && (z[1] - s).abs() < 1e-12);
        assert!((a - s).abs() < 1e-12);
        assert_eq!(
            best_cone(&mu(1, &[(&[0.0], 1.0)])),
            Err(ClassifierError::OnlyOriginAtom)
        );
    }

    #[test]
    fn best_cone_negative_optimum_in_the_plane() {
        // Three directions 120° apart: best is pointing at one atom, α = -1/2.
        let pts: Vec<Point> = (0..3)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / 3.0;
                Point(vec![0.5 * th.cos(), 0.5 * th.sin()])
            })
            .collect();
        let (_, a) = best_cone_of(&pts).unwrap();
        assert!((a + 0.5).abs() < 1e-12);
    }

    #[test]
    fn cap_fractions() {
        assert_eq!(cap_fraction(1), 0.5);
        assert!((cap_fraction(2) - 1.0 / 3.0).abs() < 1e-14);
        assert!((cap_fraction(3) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_constants() {
        let m = mu(1, &[(&[0.5], 1.0), (&[-0.5], 1.0)]);
        let sc = structure_constants(&m, Exec::Sequential).unwrap();
        assert_eq!(sc.a_star, 1.0);
        assert_eq!(sc.n, 3);
        assert_eq!(sc.b_star, 1.0);
        assert!(matches!(
            structure_constants(&mu(1, &[(&[0.5], 1.0)]), Exec::Sequential),
            Err(ClassifierError::NotH3(_))
        ));
    }

    #[test]
    fn h1_certificate_with_rational_h() {
        let mut k = crate::pde::htable::default_knots(4);
        k.push(9.0);
        k.sort_by(f64::total_cmp);
        let h = HTable::from_fn(&k, |v| v / (1.0 + v)).unwrap();
        let c = certified_width_bound(&mu(1, &[(&[0.5], 1.0)]), 0.1, &h, Exec::Sequential).unwrap();
        let expect = 2.0 * 90f64.ln() + 1.0;
        assert!((c.l_eps.unwrap() - expect).abs() < 1e-12);
        assert!(
            certified_width_bound(&mu(1, &[(&[0.5], 1.0)]), 0.5, &h, Exec::Sequential).is_err()
        );
    }
}

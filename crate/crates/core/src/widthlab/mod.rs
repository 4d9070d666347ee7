//! Level sets of sampled fields and the inclusion radii that measure the
//! width of a transition zone.
//!
//! Empty-set conventions: an empty source set has radius 0; a nonempty source
//! with an empty target has radius `+∞`. Snapshots where the `1-ε` superlevel
//! set is empty while the `ε` superlevel set is not therefore fail the bounded
//! width test, as they must.

pub mod edt;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{self, Verdict};
use crate::exec::Exec;
use crate::grid::Grid;
use crate::linfield::{self, LinField};
use crate::measure::AtomicMeasure;
use crate::pde::{Field, HTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WidthError {
    #[error("level sets live on different grids")]
    GridMismatch,
    #[error("level {0} must lie in (0, 1/2)")]
    BadLevel(f64),
    #[error(transparent)]
    Classifier(#[from] classifier::ClassifierError),
}

/// A set of grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub grid: Grid,
    pub bits: Vec<bool>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| self.grid.point(k))
            .collect()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

/// `{u ≥ ε}`.
pub fn superlevel_set(field: &Field, eps: f64) -> NodeSet {
    NodeSet {
        grid: field.grid.clone(),
        bits: field.values.iter().map(|&u| u >= eps).collect(),
    }
}

/// `{u ≤ ε}`.
pub fn sublevel_set(field: &Field, eps: f64) -> NodeSet {
    NodeSet {
        grid: field.grid.clone(),
        bits: field.values.iter().map(|&u| u <= eps).collect(),
    }
}

/// Nodes with `u ≥ ½` having an axis neighbour with `u < ½`.
pub fn half_boundary(field: &Field) -> NodeSet {
    let g = &field.grid;
    let u = &field.values;
    let strides: Vec<usize> = (0..g.dim())
        .map(|a| g.shape[a + 1..].iter().product())
        .collect();
    let bits = (0..u.len())
        .map(|k| {
            if u[k] < 0.5 {
                return false;
            }
            let idx = g.multi_index(k);
            (0..g.dim()).any(|a| {
                (idx[a] > 0 && u[k - strides[a]] < 0.5)
                    || (idx[a] + 1 < g.shape[a] && u[k + strides[a]] < 0.5)
            })
        })
        .collect();
    NodeSet {
        grid: g.clone(),
        bits,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSets {
    pub t: f64,
    pub superlevel: NodeSet,
    pub sublevel: NodeSet,
    pub half_boundary: NodeSet,
}

pub fn level_sets(field: &Field, eps: f64) -> LevelSets {
    LevelSets {
        t: field.t,
        superlevel: superlevel_set(field, eps),
        sublevel: sublevel_set(field, eps),
        half_boundary: half_boundary(field),
    }
}

/// `sup_{a∈A} dist(a, B)` from an exact distance transform of `B`. Returns 0
/// for empty `A` and `+∞` for empty `B` with nonempty `A`.
pub fn inclusion_radius(a: &NodeSet, b: &NodeSet) -> Result<f64, WidthError> {
    if a.grid != b.grid {
        return Err(WidthError::GridMismatch);
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    if b.is_empty() {
        return Ok(f64::INFINITY);
    }
    let d2 = edt::squared_distance(&b.bits, &b.grid.shape);
    let worst = a
        .bits
        .iter()
        .zip(&d2)
        .filter(|(in_a, _)| **in_a)
        .map(|(_, d)| *d)
        .fold(0.0, f64::max);
    Ok(worst.sqrt() * a.grid.dx)
}

/// Extends the box by `pad` cells per side, deciding membership outside the
/// box from `h(v) ≤ u ≤ min{v, 1}`. Source sets take every node that may
/// belong, target sets only nodes that certainly belong, so radii computed on
/// the padded grid can only grow.
#[derive(Debug, Clone, Copy)]
pub struct FarField<'a> {
    pub h: &'a HTable,
    pub pad: usize,
}

/// Lower and upper bounds for `u` at every node of a (possibly padded) grid.
struct Bounds {
    grid: Grid,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn bounds(field: &Field, lin: &LinField, far: Option<&FarField>, exec: Exec) -> Bounds {
    let Some(far) = far else {
        return Bounds {
            grid: field.grid.clone(),
            lo: field.values.clone(),
            hi: field.values.clone(),
        };
    };
    let g = &field.grid;
    let p = far.pad as f64 * g.dx;
    let padded = Grid::new(
        &g.bounds()
            .iter()
            .map(|(lo, hi)| (lo - p, hi + p))
            .collect::<Vec<_>>(),
        g.dx,
    )
    .expect("padding preserves grid validity");
    let t = field.t;
    let pairs = exec.map_range(padded.len(), |k| {
        let idx = padded.multi_index(k);
        let inner: Option<Vec<usize>> = idx
            .iter()
            .zip(&g.shape)
            .map(|(&i, &n)| i.checked_sub(far.pad).filter(|j| *j < n))
            .collect();
        match inner {
            Some(j) => {
                let u = field.values[g.flat_index(&j)];
                (u, u)
            }
            None => {
                let v = lin.value(t, &padded.point(k));
                (far.h.h(v), v.min(1.0))
            }
        }
    });
    Bounds {
        grid: padded,
        lo: pairs.iter().map(|p| p.0).collect(),
        hi: pairs.iter().map(|p| p.1).collect(),
    }
}

fn set_from<F: Fn(usize) -> bool>(grid: &Grid, f: F) -> NodeSet {
    NodeSet {
        grid: grid.clone(),
        bits: (0..grid.len()).map(f).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthRow {
    pub t: f64,
    /// Inclusion radius of `Ω_ε` into `Ω_{1-ε}`.
    #[serde(rename = "L")]
    pub l: f64,
    /// Inclusion radius of `Ω'_{1-ε}` into `Ω'_ε`.
    #[serde(rename = "L_prime")]
    pub l_prime: f64,
    /// Largest distance from `∂Ω_½` to `Γ_t`.
    #[serde(rename = "graph_L")]
    pub graph_l: Option<f64>,
    pub graph_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthProfile {
    pub epsilon: f64,
    pub rows: Vec<WidthRow>,
}

impl WidthProfile {
    pub fn max_l(&self) -> f64 {
        self.rows.iter().map(|r| r.l).fold(0.0, f64::max)
    }

    pub fn max_l_prime(&self) -> f64 {
        self.rows.iter().map(|r| r.l_prime).fold(0.0, f64::max)
    }

    pub fn max_graph_l(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.graph_l).reduce(f64::max)
    }

    pub fn l_at(&self, t: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.t - t).abs() < 1e-9)
            .map(|r| r.l)
    }

    /// CSV `t,L,L_prime,graph_L,graph_ok`; `inf` marks the empty-target
    /// sentinel and empty cells mean the graph test was not run.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "t,L,L_prime,graph_L,graph_ok")?;
        for r in &self.rows {
            let g = r.graph_l.map(|v| v.to_string()).unwrap_or_default();
            let ok = r.graph_ok.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", r.t, r.l, r.l_prime, g, ok)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WidthOptions<'a> {
    pub far_field: Option<FarField<'a>>,
    /// Run the graph test (H1 measures in d ≤ 2).
    pub graph: bool,
    /// `graph_ok` compares `graph_L` against this plus one cell diagonal;
    /// without it `graph_ok` only asserts a finite distance.
    pub graph_bound: Option<f64>,
    pub exec: Exec,
}

/// Sampled level set `Γ_t = {v_μ(t,·) = ½}` as a polyline covering the box.
fn gamma_polyline(mu: &AtomicMeasure, t: f64, zeta: &[f64], grid: &Grid) -> Vec<Vec<f64>> {
    let d = grid.dim();
    if d == 1 {
        return linfield::gamma_level(mu, t, &[], zeta)
            .map(|s| vec![vec![s * zeta[0]]])
            .unwrap_or_default();
    }
    let b = linfield::embed_base(zeta, &[1.0]);
    let corners = [
        [grid.lo[0], grid.lo[1]],
        [grid.lo[0], grid.hi[1]],
        [grid.hi[0], grid.lo[1]],
        [grid.hi[0], grid.hi[1]],
    ];
    let proj: Vec<f64> = corners.iter().map(|c| c[0] * b[0] + c[1] * b[1]).collect();
    let lo = proj.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * grid.dx;
    let hi = proj.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * grid.dx;
    let step = 0.5 * grid.dx;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    (0..n)
        .filter_map(|i| {
            let beta = lo + i as f64 * step;
            linfield::gamma_level(mu, t, &[beta], zeta)
                .ok()
                .map(|s| vec![beta * b[0] + s * zeta[0], beta * b[1] + s * zeta[1]])
        })
        .collect()
}

fn distance_to_polyline(x: &[f64], line: &[Vec<f64>]) -> f64 {
    if line.len() == 1 {
        return crate::numerics::norm(
            &x.iter()
                .zip(&line[0])
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
    }
    line.windows(2)
        .map(|w| {
            let (p, q) = (&w[0], &w[1]);
            let pq: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
            let px: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            let len2 = crate::numerics::dot(&pq, &pq);
            let s = if len2 > 0.0 {
                (crate::numerics::dot(&px, &pq) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let r: Vec<f64> = px.iter().zip(&pq).map(|(a, b)| a - s * b).collect();
            crate::numerics::norm(&r)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Width metrics for every snapshot.
pub fn width_profile(
    snapshots: &[Field],
    mu: &AtomicMeasure,
    eps: f64,
    opts: &WidthOptions,
) -> Result<WidthProfile, WidthError> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(WidthError::BadLevel(eps));
    }
    if let Some(first) = snapshots.first() {
        if snapshots.iter().any(|s| !s.grid.compatible(&first.grid)) || first.dim() != mu.dim() {
            return Err(WidthError::GridMismatch);
        }
    }
    let lin = LinField::new(mu);
    let zeta = if opts.graph && mu.dim() <= 2 {
        let c = classifier::classify(mu)?;
        (c.verdict == Verdict::H1FrontAndBounded).then(|| c.cone().expect("H1 cone").0.clone())
    } else {
        None
    };
    let rows: Vec<Result<WidthRow, WidthError>> = opts.exec.map(snapshots, |f| {
        let b = bounds(f, &lin, opts.far_field.as_ref(), Exec::Sequential);
        let g = &b.grid;
        let src = set_from(g, |k| b.hi[k] >= eps);
        let dst = set_from(g, |k| b.lo[k] >= 1.0 - eps);
        let l = inclusion_radius(&src, &dst)?;
        let src_p = set_from(g, |k| b.lo[k] <= 1.0 - eps);
        let dst_p = set_from(g, |k| b.hi[k] <= eps);
        let l_prime = inclusion_radius(&src_p, &dst_p)?;
        let (graph_l, graph_ok) = match &zeta {
            Some(z) => {
                let line = gamma_polyline(mu, f.t, z, &f.grid);
                let gl = half_boundary(f)
                    .points()
                    .iter()
                    .map(|x| distance_to_polyline(x, &line))
                    .fold(0.0, f64::max);
                let ok = match opts.graph_bound {
                    Some(bound) => gl <= bound + f.grid.cell_diagonal(),
                    None => gl.is_finite(),
                };
                (Some(gl), Some(ok))
            }
            None => (None, None),
        };
        Ok(WidthRow {
            t: f.t,
            l,
            l_prime,
            graph_l,
            graph_ok,
        })
    });
    Ok(WidthProfile {
        epsilon: eps,
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}

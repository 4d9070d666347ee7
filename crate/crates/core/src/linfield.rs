//! The linearised solution `v_μ(t,x) = Σ w_i exp(-ξ_i·x + (|ξ_i|²+1)t)`.
//!
//! Exponents reach ±10³ across the diagnostic range, so every evaluation is
//! done in log space: the largest exponent is factored out, atoms are summed
//! in descending exponent order with a compensated accumulator.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::geometry::Point;
use crate::grid::Grid;
use crate::measure::AtomicMeasure;
use crate::numerics::{self, NeumaierSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinFieldError {
    #[error("point has {found} coordinates, measure has dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(
        "radii must satisfy 0 < delta' < delta < 1 (got delta = {delta}, delta' = {delta_prime})"
    )]
    BadRadii { delta: f64, delta_prime: f64 },
    #[error("radius {0} must lie in (0, 1]")]
    NonpositiveRadius(f64),
    #[error("atom {index} has xi.zeta = {projection} <= 0; v is not monotone along the axis")]
    MonotonicityViolated { index: usize, projection: f64 },
    #[error("level crossing not found within the search range")]
    NoCrossing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinEval {
    pub value: f64,
    pub log_value: f64,
    pub gradient: Vec<f64>,
}

impl LinEval {
    fn zero(d: usize) -> Self {
        LinEval {
            value: 0.0,
            log_value: f64::NEG_INFINITY,
            gradient: vec![0.0; d],
        }
    }
}

/// Precomputed per-atom data for repeated evaluation of one measure.
#[derive(Debug, Clone)]
pub struct LinField {
    dim: usize,
    xi: Vec<f64>,
    log_w: Vec<f64>,
    growth: Vec<f64>,
}

impl LinField {
    pub fn new(mu: &AtomicMeasure) -> Self {
        Self::from_atoms(mu, |_| true)
    }

    fn from_atoms<P: Fn(f64) -> bool>(mu: &AtomicMeasure, keep: P) -> Self {
        let mut f = LinField {
            dim: mu.dim(),
            xi: Vec::new(),
            log_w: Vec::new(),
            growth: Vec::new(),
        };
        for a in mu.atoms() {
            let r2 = a.xi.dot(&a.xi);
            if keep(r2.sqrt()) {
                f.xi.extend_from_slice(&a.xi);
                f.log_w.push(a.weight.ln());
                f.growth.push(r2 + 1.0);
            }
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    fn xi(&self, i: usize) -> &[f64] {
        &self.xi[i * self.dim..(i + 1) * self.dim]
    }

    fn exponent(&self, i: usize, t: f64, x: &[f64]) -> f64 {
        self.log_w[i] - numerics::dot(self.xi(i), x) + self.growth[i] * t
    }

    /// Exponents sorted descending; ties keep atom order.
    fn sorted_exponents(&self, t: f64, x: &[f64]) -> Vec<(f64, usize)> {
        let mut e: Vec<(f64, usize)> = (0..self.len())
            .map(|i| (self.exponent(i, t, x), i))
            .collect();
        e.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        e
    }

    /// `ln v(t,x)`; `-inf` for an empty atom set.
    pub fn log_value(&self, t: f64, x: &[f64]) -> f64 {
        if self.is_empty() {
            return f64::NEG_INFINITY;
        }
        let e = self.sorted_exponents(t, x);
        let m = e[0].0;
        let mut s = NeumaierSum::new();
        for &(ei, _) in &e {
            s += (ei - m).exp();
        }
        m + s.value().ln()
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.log_value(t, x).exp()
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<LinEval, LinFieldError> {
        if x.len() != self.dim {
            return Err(LinFieldError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if self.is_empty() {
            return Ok(LinEval::zero(self.dim));
        }
        let e = self.sorted_exponents(t, x);
        let m = e[0].0;
        let mut s = NeumaierSum::new();
        let mut g = vec![NeumaierSum::new(); self.dim];
        for &(ei, i) in &e {
            let r = (ei - m).exp();
            s += r;
            for (gk, xk) in g.iter_mut().zip(self.xi(i)) {
                *gk += -xk * r;
            }
        }
        let log_value = m + s.value().ln();
        let scale = m.exp();
        Ok(LinEval {
            value: log_value.exp(),
            log_value,
            gradient: g.iter().map(|gk| gk.value() * scale).collect(),
        })
    }
}

pub fn eval_v(mu: &AtomicMeasure, t: f64, x: &[f64]) -> Result<LinEval, LinFieldError> {
    LinField::new(mu).eval(t, x)
}

/// `v1` over `|ξ| ∈ [δ,1)`, `v2` over `|ξ| < δ`, `v3` over `|ξ| < δ'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitEval {
    pub v1: LinEval,
    pub v2: LinEval,
    pub v3: LinEval,
}

/// Evaluators for the three annular pieces of a measure.
#[derive(Debug, Clone)]
pub struct SplitField {
    pub outer: LinField,
    pub inner: LinField,
    pub core: LinField,
}

impl SplitField {
    pub fn new(mu: &AtomicMeasure, delta: f64, delta_prime: f64) -> Result<Self, LinFieldError> {
        if !(0.0 < delta_prime && delta_prime < delta && delta < 1.0) {
            return Err(LinFieldError::BadRadii { delta, delta_prime });
        }
        Ok(SplitField {
            outer: LinField::from_atoms(mu, |r| r >= delta),
            inner: LinField::from_atoms(mu, |r| r < delta),
            core: LinField::from_atoms(mu, |r| r < delta_prime),
        })
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<SplitEval, LinFieldError> {
        Ok(SplitEval {
            v1: self.outer.eval(t, x)?,
            v2: self.inner.eval(t, x)?,
            v3: self.core.eval(t, x)?,
        })
    }
}

pub fn eval_v_split(
    mu: &AtomicMeasure,
    t: f64,
    x: &[f64],
    delta: f64,
    delta_prime: f64,
) -> Result<SplitEval, LinFieldError> {
    SplitField::new(mu, delta, delta_prime)?.eval(t, x)
}

/// `δ' = αδ/6`, the inner radius used by the divergence argument.
pub fn default_inner_radius(alpha: f64, delta: f64) -> f64 {
    alpha * delta / 6.0
}

/// `c_λ = λ + 1/λ`.
pub fn wave_speed(lambda: f64) -> Result<f64, LinFieldError> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(LinFieldError::NonpositiveRadius(lambda));
    }
    Ok(lambda + 1.0 / lambda)
}

/// Orthonormal basis of `ζ⊥` from the Householder reflection taking `e_d` to `ζ`.
pub fn orthonormal_complement(zeta: &[f64]) -> Vec<Point> {
    let d = zeta.len();
    let mut u: Vec<f64> = zeta.iter().map(|z| -z).collect();
    u[d - 1] += 1.0;
    let n = numerics::norm(&u);
    if n < 1e-15 {
        return (0..d - 1).map(|k| Point::basis(d, k)).collect();
    }
    u.iter_mut().for_each(|c| *c /= n);
    (0..d - 1)
        .map(|k| {
            let mut e = Point::basis(d, k);
            for (j, c) in e.0.iter_mut().enumerate() {
                *c -= 2.0 * u[j] * u[k];
            }
            e
        })
        .collect()
}

/// Embeds `base ∈ ℝ^{d-1}` into `ζ⊥` using [`orthonormal_complement`].
pub fn embed_base(zeta: &[f64], base: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; zeta.len()];
    for (b, e) in base.iter().zip(orthonormal_complement(zeta)) {
        for (xk, ek) in x.iter_mut().zip(e.coords()) {
            *xk += b * ek;
        }
    }
    x
}

/// The `s` with `v(t, base' + sζ) = ½`, where `base'` is `base` embedded in `ζ⊥`.
pub fn gamma_level(
    mu: &AtomicMeasure,
    t: f64,
    base: &[f64],
    zeta: &[f64],
) -> Result<f64, LinFieldError> {
    level_along_axis(mu, t, base, zeta, 0.5)
}

/// Generalisation of [`gamma_level`] to an arbitrary positive level.
pub fn level_along_axis(
    mu: &AtomicMeasure,
    t: f64,
    base: &[f64],
    zeta: &[f64],
    level: f64,
) -> Result<f64, LinFieldError> {
    let d = mu.dim();
    if zeta.len() != d {
        return Err(LinFieldError::DimensionMismatch {
            expected: d,
            found: zeta.len(),
        });
    }
    if base.len() + 1 != d {
        return Err(LinFieldError::DimensionMismatch {
            expected: d - 1,
            found: base.len(),
        });
    }
    for (index, a) in mu.atoms().iter().enumerate() {
        let projection = a.xi.dot(zeta);
        if projection <= 0.0 {
            return Err(LinFieldError::MonotonicityViolated { index, projection });
        }
    }
    let field = LinField::new(mu);
    let origin = embed_base(zeta, base);
    let target = level.ln();
    let g = |s: f64| {
        let x: Vec<f64> = origin.iter().zip(zeta).map(|(o, z)| o + s * z).collect();
        field.log_value(t, &x) - target
    };
    numerics::decreasing_root(g, 0.0, f64::MAX / 4.0, 200).ok_or(LinFieldError::NoCrossing)
}

/// `(x, v, ln v)` at every grid node.
pub fn sample_grid(mu: &AtomicMeasure, t: f64, grid: &Grid, exec: Exec) -> Vec<(f64, f64)> {
    let field = LinField::new(mu);
    exec.map_range(grid.len(), |k| {
        let lv = field.log_value(t, &grid.point(k));
        (lv.exp(), lv)
    })
}

/// CSV with header `t,x_1..x_d,v,log_v`; floats use the shortest round-trip form.
pub fn write_grid_csv<W: Write>(
    out: &mut W,
    t: f64,
    grid: &Grid,
    samples: &[(f64, f64)],
) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=grid.dim()).map(|k| format!("x_{k}")));
    header.push("v".into());
    header.push("log_v".into());
    writeln!(out, "{}", header.join(","))?;
    for (k, (v, lv)) in samples.iter().enumerate() {
        write!(out, "{t}")?;
        for c in grid.point(k) {
            write!(out, ",{c}")?;
        }
        writeln!(out, ",{v},{lv}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GridDumpMeta<'a> {
    pub t: f64,
    pub grid: &'a Grid,
    pub columns: Vec<String>,
    pub atoms: usize,
}

//! Empirical stand-in for the lower comparison function `h` in
//! `h(v_μ) ≤ u_μ ≤ min{v_μ, 1}`.
//!
//! The table is a right-continuous step function: `h(v) = h_j` for
//! `v_j ≤ v < v_{j+1}`. Each `h_j` is a lower bound for the true `h(v_j)`, so
//! the step function underestimates `h` and the inverse lookup (smallest knot
//! with `h_j ≥ y`) overestimates `h^{-1}`. Both directions keep every derived
//! width bound conservative.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HTableError {
    #[error("level {requested} exceeds the largest tabulated value {h_max}")]
    HRangeExceeded { requested: f64, h_max: f64 },
    #[error("table needs strictly increasing nonnegative knots starting at 0")]
    BadKnots,
    #[error("t0 study disagrees by {diff} > {tol} (at v = {v})")]
    NotConverged { diff: f64, tol: f64, v: f64 },
}

/// Differences between tables calibrated from successively earlier start times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEvidence {
    pub t0: Vec<f64>,
    /// `max_j |h_j(t0_k) - h_j(t0_{k+1})|` for consecutive start times.
    pub successive_max_diff: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HTable {
    v: Vec<f64>,
    h: Vec<f64>,
    /// Free-form provenance (reaction, radii, grid).
    pub source: BTreeMap<String, String>,
    pub evidence: Option<ConvergenceEvidence>,
}

/// `0` followed by `per_decade` log-spaced knots per decade over `[1e-4, 1e8]`.
pub fn default_knots(per_decade: usize) -> Vec<f64> {
    let decades = 12;
    let n = decades * per_decade;
    let mut k = vec![0.0];
    k.extend((0..=n).map(|i| 10f64.powf(-4.0 + i as f64 / per_decade as f64)));
    k
}

/// Largest value a table entry may take; entries must stay below 1.
pub const H_CEILING: f64 = 1.0 - 1e-12;

impl HTable {
    /// Builds a table from knots and lower-bound values, enforcing
    /// `h(0) = 0`, `h_j ≤ min(v_j, H_CEILING)` and monotonicity.
    pub fn new(v: Vec<f64>, h: Vec<f64>) -> Result<Self, HTableError> {
        if v.is_empty() || v.len() != h.len() || v[0] != 0.0 {
            return Err(HTableError::BadKnots);
        }
        if v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
            return Err(HTableError::BadKnots);
        }
        let mut out = Vec::with_capacity(h.len());
        let mut run = 0.0f64;
        for (&vj, &hj) in v.iter().zip(&h) {
            let capped = hj.max(0.0).min(vj).min(H_CEILING);
            run = run.max(capped);
            out.push(run.min(vj));
        }
        out[0] = 0.0;
        Ok(HTable {
            v,
            h: out,
            source: BTreeMap::new(),
            evidence: None,
        })
    }

    /// Tabulates a known increasing function.
    pub fn from_fn<F: Fn(f64) -> f64>(knots: &[f64], f: F) -> Result<Self, HTableError> {
        Self::new(knots.to_vec(), knots.iter().map(|&v| f(v)).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.v
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn h_max(&self) -> f64 {
        *self.h.last().expect("table is nonempty")
    }

    /// Step-function value at `v ≥ 0`.
    pub fn h(&self, v: f64) -> f64 {
        if !(v >= 0.0) {
            return 0.0;
        }
        let j = self.v.partition_point(|&k| k <= v);
        self.h[j.saturating_sub(1)]
    }

    /// Smallest knot `v_j` with `h_j ≥ y`.
    pub fn h_inv(&self, y: f64) -> Result<f64, HTableError> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let j = self.h.partition_point(|&hj| hj < y);
        if j == self.h.len() {
            return Err(HTableError::HRangeExceeded {
                requested: y,
                h_max: self.h_max(),
            });
        }
        Ok(self.v[j])
    }

    /// `h(v_1)/v_1` at the smallest positive knot.
    pub fn origin_slope(&self) -> Option<f64> {
        self.v
            .iter()
            .zip(&self.h)
            .find(|(v, _)| **v > 0.0)
            .map(|(v, h)| h / v)
    }

    /// Smallest knot with `h ≥ level`, if any.
    pub fn saturation_point(&self, level: f64) -> Option<f64> {
        self.h_inv(level).ok()
    }

    /// Pointwise minimum of two tables on identical knots.
    pub fn lower_envelope(&self, other: &HTable) -> Result<Self, HTableError> {
        if self.v != other.v {
            return Err(HTableError::BadKnots);
        }
        Self::new(
            self.v.clone(),
            self.h
                .iter()
                .zip(&other.h)
                .map(|(a, b)| a.min(*b))
                .collect(),
        )
    }

    /// `max_j |h_j - g_j|` and the knot where it occurs.
    pub fn max_difference(&self, other: &HTable) -> Result<(f64, f64), HTableError> {
        if self.v != other.v {
            return Err(HTableError::BadKnots);
        }
        Ok(self
            .h
            .iter()
            .zip(&other.h)
            .zip(&self.v)
            .map(|((a, b), v)| ((a - b).abs(), *v))
            .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc }))
    }

    /// Stable identifier derived from the knot and value bits.
    pub fn id(&self) -> String {
        let mut s = std::hash::DefaultHasher::new();
        for (v, h) in self.v.iter().zip(&self.h) {
            v.to_bits().hash(&mut s);
            h.to_bits().hash(&mut s);
        }
        format!("h-{:016x}", s.finish())
    }
}

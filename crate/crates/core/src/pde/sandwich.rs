use serde::{Deserialize, Serialize};

use super::field::Field;
use super::htable::HTable;
use crate::exec::Exec;
use crate::linfield::LinField;
use crate::measure::AtomicMeasure;

/// Worst violations of `h(v) ≤ u ≤ min{v, 1}` over a set of snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `max (h(v) - u)₊`.
    pub lower: f64,
    pub lower_at: Option<(f64, Vec<f64>)>,
    /// `max (u - min{v,1})₊`.
    pub upper: f64,
    pub upper_at: Option<(f64, Vec<f64>)>,
    pub snapshots: usize,
}

pub fn check_sandwich(
    snapshots: &[Field],
    mu: &AtomicMeasure,
    h: &HTable,
    exec: Exec,
) -> SandwichReport {
    let lin = LinField::new(mu);
    let mut rep = SandwichReport {
        lower: 0.0,
        lower_at: None,
        upper: 0.0,
        upper_at: None,
        snapshots: snapshots.len(),
    };
    for f in snapshots {
        let gaps = exec.map_range(f.values.len(), |k| {
            let v = lin.value(f.t, &f.grid.point(k));
            let u = f.values[k];
            ((h.h(v) - u).max(0.0), (u - v.min(1.0)).max(0.0))
        });
        for (k, (lo, up)) in gaps.into_iter().enumerate() {
            if lo > rep.lower {
                rep.lower = lo;
                rep.lower_at = Some((f.t, f.grid.point(k)));
            }
            if up > rep.upper {
                rep.upper = up;
                rep.upper_at = Some((f.t, f.grid.point(k)));
            }
        }
    }
    rep
}

/// Smallest `u(t+Δ) - u(t)` over consecutive snapshots on a common grid.
/// Snapshots whose grids differ (moving window) are compared on the overlap.
pub fn min_time_increment(snapshots: &[Field]) -> f64 {
    let mut worst = f64::INFINITY;
    for w in snapshots.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.grid.shape != b.grid.shape {
            continue;
        }
        let shift = ((b.grid.lo[0] - a.grid.lo[0]) / a.grid.dx).round() as isize;
        let stride: usize = a.grid.shape[1..].iter().product();
        let n = a.values.len() as isize;
        let off = shift * stride as isize;
        for k in 0..n {
            let ka = k + off;
            if ka >= 0 && ka < n {
                worst = worst.min(b.values[k as usize] - a.values[ka as usize]);
            }
        }
    }
    worst
}

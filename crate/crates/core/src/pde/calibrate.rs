//! Calibration of the lower envelope `h` from planar single-atom runs.

use serde::{Deserialize, Serialize};

use super::field::{init_from_linearization, Field};
use super::htable::{default_knots, ConvergenceEvidence, HTable};
use super::integrate::{integrate, IntegrateOptions, MeasureBoundary, MovingWindow};
use super::reaction::ReactionFn;
use super::PdeError;
use crate::exec::Exec;
use crate::grid::Grid;
use crate::linfield::{wave_speed, LinField};
use crate::measure::AtomicMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Start times of the convergence study, most recent first.
    pub t0_study: Vec<f64>,
    pub sample_times: Vec<f64>,
    pub dx: f64,
    /// Box extent behind and ahead of the half-level point, in units of `1/λ`.
    pub behind: f64,
    pub ahead: f64,
    /// Samples closer than this to the box edge are discarded.
    pub margin: f64,
    pub knots: Vec<f64>,
    pub tolerance: f64,
    #[serde(skip, default)]
    pub exec: Exec,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            t0_study: vec![-8.0, -12.0, -16.0],
            sample_times: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            dx: 0.05,
            behind: 21.0,
            ahead: 12.0,
            margin: 4.0,
            knots: default_knots(8),
            tolerance: 5e-3,
            exec: Exec::default(),
        }
    }
}

/// `(v, u)` pairs from one converged planar run with decay rate `λ`.
pub fn planar_samples(
    reaction: &ReactionFn,
    lambda: f64,
    t0: f64,
    opts: &CalibrationOptions,
) -> Result<Vec<(f64, f64)>, PdeError> {
    let mu = AtomicMeasure::planar_wave(1, lambda)?;
    let c = wave_speed(lambda)?;
    let half = c * t0 + 2f64.ln() / lambda;
    let behind = (opts.behind / lambda / opts.dx).ceil() * opts.dx;
    let ahead = (opts.ahead / lambda / opts.dx).ceil() * opts.dx;
    let lo = (half / opts.dx).round() * opts.dx - behind;
    let grid = Grid::new(&[(lo, lo + behind + ahead)], opts.dx)?;
    let field = init_from_linearization(&mu, t0, grid, opts.exec)?;
    let t_end = opts
        .sample_times
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let run = integrate(
        field,
        reaction,
        &MeasureBoundary::new(&mu),
        t_end,
        &IntegrateOptions {
            snapshot_times: opts.sample_times.clone(),
            window: Some(MovingWindow {
                level: 0.5,
                anchor: behind / (behind + ahead),
                check_every: 50,
            }),
            exec: opts.exec,
            ..Default::default()
        },
    )?;
    let lin = LinField::new(&mu);
    let mut out = Vec::new();
    for snap in &run.snapshots {
        collect(&lin, snap, opts.margin, &mut out);
    }
    Ok(out)
}

fn collect(lin: &LinField, f: &Field, margin: f64, out: &mut Vec<(f64, f64)>) {
    for (k, &u) in f.values.iter().enumerate() {
        let x = f.grid.point(k);
        let inside = x
            .iter()
            .enumerate()
            .all(|(a, xa)| *xa >= f.grid.lo[a] + margin && *xa <= f.grid.hi[a] - margin);
        if inside {
            out.push((lin.value(f.t, &x), u));
        }
    }
}

/// Largest table below every sample: `h_j = min{u : v ≥ v_j / spacing}`, held
/// flat above the largest sampled `v`.
///
/// `spacing ≥ 1` is the largest ratio between `v` at neighbouring samples. On
/// a grid the sample just below a knot can sit one cell away, and since the
/// profile is monotone its `u` still bounds `h(v_j)` from below.
pub fn table_from_samples(
    samples: &mut [(f64, f64)],
    knots: &[f64],
    spacing: f64,
) -> Result<HTable, PdeError> {
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut h = vec![0.0; knots.len()];
    let mut idx = 0;
    let mut run = f64::INFINITY;
    for j in (0..knots.len()).rev() {
        while idx < samples.len() && samples[idx].0 * spacing >= knots[j] {
            run = run.min(samples[idx].1);
            idx += 1;
        }
        h[j] = run;
    }
    // Knots above every sample inherit the value of the largest covered knot.
    let top = h
        .iter()
        .rev()
        .find(|v| v.is_finite())
        .copied()
        .unwrap_or(0.0);
    for v in h.iter_mut().filter(|v| !v.is_finite()) {
        *v = top;
    }
    Ok(HTable::new(knots.to_vec(), h)?)
}

/// Lower envelope over `lambdas` of planar calibrations, repeated for each
/// start time in the study. Returns the table from the earliest start time.
pub fn estimate_h(
    reaction: &ReactionFn,
    lambdas: &[f64],
    opts: &CalibrationOptions,
) -> Result<HTable, PdeError> {
    if lambdas.is_empty() || opts.t0_study.is_empty() {
        return Err(PdeError::Config(
            "need at least one radius and one start time".into(),
        ));
    }
    let mut tables: Vec<HTable> = Vec::new();
    for &t0 in &opts.t0_study {
        let mut table: Option<HTable> = None;
        for &lam in lambdas {
            let mut s = planar_samples(reaction, lam, t0, opts)?;
            let t = table_from_samples(&mut s, &opts.knots, (lam * opts.dx).exp())?;
            table = Some(match table {
                None => t,
                Some(prev) => prev.lower_envelope(&t)?,
            });
        }
        tables.push(table.expect("at least one radius"));
    }
    let mut diffs = Vec::new();
    for w in tables.windows(2) {
        let (diff, v) = w[0].max_difference(&w[1])?;
        if diff > opts.tolerance {
            return Err(PdeError::NotConverged {
                diff,
                tol: opts.tolerance,
                v,
            });
        }
        diffs.push(diff);
    }
    let mut out = tables.pop().expect("nonempty study");
    out.evidence = Some(ConvergenceEvidence {
        t0: opts.t0_study.clone(),
        successive_max_diff: diffs,
        tolerance: opts.tolerance,
    });
    out.source.insert("reaction".into(), reaction.name().into());
    out.source.insert(
        "lambdas".into(),
        lambdas
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    out.source.insert("dx".into(), opts.dx.to_string());
    Ok(out)
}

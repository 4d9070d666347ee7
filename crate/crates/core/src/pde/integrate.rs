use serde::{Deserialize, Serialize};

use super::field::Field;
use super::reaction::ReactionFn;
use super::PdeError;
use crate::exec::Exec;
use crate::linfield::LinField;
use crate::measure::AtomicMeasure;

/// Time-dependent Dirichlet data.
pub trait DirichletSource: Sync {
    fn value(&self, t: f64, x: &[f64]) -> f64;
}

/// `min{v_μ(t, x), 1}`.
pub struct MeasureBoundary {
    field: LinField,
}

impl MeasureBoundary {
    pub fn new(mu: &AtomicMeasure) -> Self {
        MeasureBoundary {
            field: LinField::new(mu),
        }
    }
}

impl DirichletSource for MeasureBoundary {
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.field.value(t, x).min(1.0)
    }
}

pub struct ConstantBoundary(pub f64);

impl DirichletSource for ConstantBoundary {
    fn value(&self, _t: f64, _x: &[f64]) -> f64 {
        self.0
    }
}

pub struct FnBoundary<F>(pub F);

impl<F: Fn(f64, &[f64]) -> f64 + Sync> DirichletSource for FnBoundary<F> {
    fn value(&self, t: f64, x: &[f64]) -> f64 {
        (self.0)(t, x)
    }
}

/// Re-centres the box along axis 0 so the `level` crossing stays at
/// `lo + anchor·(hi - lo)`. Vacated nodes are refilled from the boundary rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingWindow {
    pub level: f64,
    pub anchor: f64,
    pub check_every: usize,
}

impl Default for MovingWindow {
    fn default() -> Self {
        MovingWindow {
            level: 0.5,
            anchor: 0.5,
            check_every: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    /// `Δt = cfl·Δx²/(2d)`, `cfl ∈ (0, 1]`.
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
    pub window: Option<MovingWindow>,
    pub exec: Exec,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            cfl: 0.4,
            snapshot_times: Vec::new(),
            window: None,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    pub final_field: Field,
    /// Largest step used.
    pub dt: f64,
    pub steps: usize,
    /// Largest pre-clamp excursion outside `[0, 1]`.
    pub max_excursion: f64,
    /// Total window shift in cells.
    pub shift_cells: usize,
}

struct Stepper<'a> {
    reaction: &'a ReactionFn,
    exec: Exec,
    shape: Vec<usize>,
    inv_dx2: f64,
    chunk: usize,
}

impl Stepper<'_> {
    /// `dst = Δsrc + f(src)` at interior nodes, 0 on the boundary.
    fn rhs(&self, src: &[f64], dst: &mut [f64]) {
        let inv = self.inv_dx2;
        let f = self.reaction;
        if self.shape.len() == 1 {
            let n = src.len();
            let chunk = self.chunk;
            self.exec.for_each_chunk_mut(dst, chunk, |ci, out| {
                let base = ci * chunk;
                for (o, slot) in out.iter_mut().enumerate() {
                    let k = base + o;
                    *slot = if k == 0 || k + 1 == n {
                        0.0
                    } else {
                        let u = src[k];
                        (src[k - 1] + src[k + 1] - 2.0 * u) * inv + f.eval(u)
                    };
                }
            });
            return;
        }
        let (rows, m) = (self.shape[0], self.shape[1]);
        self.exec.for_each_chunk_mut(dst, m, |i, out| {
            if i == 0 || i + 1 == rows {
                out.fill(0.0);
                return;
            }
            let up = &src[(i - 1) * m..i * m];
            let mid = &src[i * m..(i + 1) * m];
            let down = &src[(i + 1) * m..(i + 2) * m];
            out[0] = 0.0;
            out[m - 1] = 0.0;
            for j in 1..m - 1 {
                let u = mid[j];
                out[j] = (mid[j - 1] + mid[j + 1] + up[j] + down[j] - 4.0 * u) * inv + f.eval(u);
            }
        });
    }

    /// `dst = a + s·b`.
    fn axpy(&self, dst: &mut [f64], a: &[f64], s: f64, b: &[f64]) {
        let chunk = self.chunk;
        self.exec.for_each_chunk_mut(dst, chunk, |ci, out| {
            let base = ci * chunk;
            for (o, slot) in out.iter_mut().enumerate() {
                *slot = a[base + o] + s * b[base + o];
            }
        });
    }

    fn accumulate(&self, acc: &mut [f64], s: f64, b: &[f64]) {
        let chunk = self.chunk;
        self.exec.for_each_chunk_mut(acc, chunk, |ci, out| {
            let base = ci * chunk;
            for (o, slot) in out.iter_mut().enumerate() {
                *slot += s * b[base + o];
            }
        });
    }
}

fn boundary_nodes(field: &Field) -> Vec<(usize, Vec<f64>)> {
    (0..field.grid.len())
        .filter(|&k| field.grid.on_boundary(k))
        .map(|k| (k, field.grid.point(k)))
        .collect()
}

fn boundary_values(
    nodes: &[(usize, Vec<f64>)],
    src: &dyn DirichletSource,
    t: f64,
    exec: Exec,
) -> Vec<f64> {
    exec.map(nodes, |(_, x)| src.value(t, x))
}

fn apply(buf: &mut [f64], nodes: &[(usize, Vec<f64>)], vals: &[f64]) {
    for ((k, _), v) in nodes.iter().zip(vals) {
        buf[*k] = *v;
    }
}

/// Integrates `u_t = Δu + f(u)` by second-order finite differences and
/// classical RK4 from `field.t` to `t_end`, with Dirichlet data from
/// `boundary`. Steps between output times are equal, so snapshots land on the
/// requested times exactly. Values are clamped to `[0, 1]` after every step.
pub fn integrate(
    field: Field,
    reaction: &ReactionFn,
    boundary: &dyn DirichletSource,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, PdeError> {
    if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(PdeError::CflViolation(opts.cfl));
    }
    if !(t_end > field.t) {
        return Err(PdeError::BadEndTime {
            start: field.t,
            end: t_end,
        });
    }
    let d = field.dim();
    let dx = field.grid.dx;
    let dt_max = opts.cfl * dx * dx / (2.0 * d as f64);
    let exec = opts.exec;
    let stepper = Stepper {
        reaction,
        exec,
        shape: field.grid.shape.clone(),
        inv_dx2: 1.0 / (dx * dx),
        chunk: if d == 2 { field.grid.shape[1] } else { 4096 },
    };

    let mut requested: Vec<f64> = opts
        .snapshot_times
        .iter()
        .cloned()
        .filter(|&s| s >= field.t && s <= t_end)
        .collect();
    requested.sort_by(f64::total_cmp);
    requested.dedup();
    let mut stops = requested.clone();
    if stops.last() != Some(&t_end) {
        stops.push(t_end);
    }

    let mut grid = field.grid.clone();
    let mut t = field.t;
    let mut u = field.values;
    let n = u.len();
    let mut nodes = boundary_nodes(&Field::new(grid.clone(), t, vec![0.0; n])?);
    let mut tmp = vec![0.0; n];
    let mut k = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut snapshots = Vec::with_capacity(requested.len());
    let mut steps = 0usize;
    let mut max_excursion = 0.0f64;
    let mut shift_cells = 0usize;

    for stop in stops {
        let span = stop - t;
        let m = if span > 0.0 {
            (span / dt_max).ceil() as usize
        } else {
            0
        };
        let t_start = t;
        for s in 0..m {
            let t_now = t_start + span * s as f64 / m as f64;
            let t_next = t_start + span * (s + 1) as f64 / m as f64;
            let dt = t_next - t_now;
            let half = boundary_values(&nodes, boundary, t_now + 0.5 * dt, exec);
            let full = boundary_values(&nodes, boundary, t_next, exec);

            stepper.rhs(&u, &mut k);
            stepper.axpy(&mut acc, &u, dt / 6.0, &k);
            stepper.axpy(&mut tmp, &u, 0.5 * dt, &k);
            apply(&mut tmp, &nodes, &half);

            stepper.rhs(&tmp, &mut k);
            stepper.accumulate(&mut acc, dt / 3.0, &k);
            stepper.axpy(&mut tmp, &u, 0.5 * dt, &k);
            apply(&mut tmp, &nodes, &half);

            stepper.rhs(&tmp, &mut k);
            stepper.accumulate(&mut acc, dt / 3.0, &k);
            stepper.axpy(&mut tmp, &u, dt, &k);
            apply(&mut tmp, &nodes, &full);

            stepper.rhs(&tmp, &mut k);
            stepper.accumulate(&mut acc, dt / 6.0, &k);
            std::mem::swap(&mut u, &mut acc);
            apply(&mut u, &nodes, &full);

            for (idx, v) in u.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(PdeError::NonFiniteValue {
                        t: t_next,
                        index: idx,
                    });
                }
                max_excursion = max_excursion.max(-*v).max(*v - 1.0);
                *v = v.clamp(0.0, 1.0);
            }
            t = t_next;
            steps += 1;

            if let Some(w) = opts.window {
                if steps % w.check_every.max(1) == 0 {
                    let probe = Field {
                        grid: grid.clone(),
                        t,
                        values: std::mem::take(&mut u),
                    };
                    let shifted = shift_window(probe, &w, boundary, exec);
                    shift_cells += shifted.1;
                    let f = shifted.0;
                    if shifted.1 > 0 {
                        grid = f.grid.clone();
                        nodes = boundary_nodes(&f);
                    }
                    u = f.values;
                }
            }
        }
        t = stop;
        if requested.contains(&stop) {
            snapshots.push(Field {
                grid: grid.clone(),
                t,
                values: u.clone(),
            });
        }
    }
    Ok(Trajectory {
        snapshots,
        final_field: Field { grid, t, values: u },
        dt: dt_max,
        steps,
        max_excursion,
        shift_cells,
    })
}

fn shift_window(
    field: Field,
    w: &MovingWindow,
    boundary: &dyn DirichletSource,
    exec: Exec,
) -> (Field, usize) {
    let Some(xf) = field.front_position(w.level) else {
        return (field, 0);
    };
    let g = &field.grid;
    let target = g.lo[0] + w.anchor * (g.hi[0] - g.lo[0]);
    let cells = ((xf - target) / g.dx).floor();
    if cells < 1.0 {
        return (field, 0);
    }
    let cells = (cells as usize).min(g.shape[0] - 1);
    let stride: usize = g.shape[1..].iter().product();
    let new_grid = g.shifted(cells as isize);
    let n = field.values.len();
    let off = cells * stride;
    let t = field.t;
    let values = exec.map_range(n, |k| {
        if k + off < n {
            field.values[k + off]
        } else {
            boundary.value(t, &new_grid.point(k)).clamp(0.0, 1.0)
        }
    });
    (
        Field {
            grid: new_grid,
            t,
            values,
        },
        cells,
    )
}

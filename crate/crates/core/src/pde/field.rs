use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PdeError;
use crate::exec::Exec;
use crate::grid::Grid;
use crate::linfield::LinField;
use crate::measure::AtomicMeasure;

/// Samples of `u(t, ·)` at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub t: f64,
    pub values: Vec<f64>,
}

/// JSON header written next to a binary snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub t: f64,
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
    pub dx: f64,
    pub d: usize,
    pub shape: Vec<usize>,
    pub encoding: String,
}

/// Largest supported field dimension.
pub const MAX_FIELD_DIM: usize = 2;

impl Field {
    pub fn new(grid: Grid, t: f64, values: Vec<f64>) -> Result<Self, PdeError> {
        if grid.dim() > MAX_FIELD_DIM {
            return Err(PdeError::Dimension(grid.dim()));
        }
        if values.len() != grid.len() {
            return Err(PdeError::Shape {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Field { grid, t, values })
    }

    pub fn constant(grid: Grid, t: f64, value: f64) -> Result<Self, PdeError> {
        let n = grid.len();
        Self::new(grid, t, vec![value; n])
    }

    /// Nodal values of `f(x)`.
    pub fn from_fn<F>(grid: Grid, t: f64, f: F, exec: Exec) -> Result<Self, PdeError>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = exec.map_range(grid.len(), |k| f(&grid.point(k)));
        Self::new(grid, t, values)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// First `x` (scanning axis 0 upward) where the 1-D profile drops below
    /// `level`, linearly interpolated. For 2-D fields the row through the
    /// middle of axis 1 is used.
    pub fn front_position(&self, level: f64) -> Option<f64> {
        let (row, stride, offset) = self.axis0_line();
        let n = row;
        let at = |i: usize| self.values[offset + i * stride];
        (1..n).find_map(|i| {
            let (a, b) = (at(i - 1), at(i));
            if a >= level && b < level {
                let x0 = self.grid.coordinate(0, i - 1);
                let w = (a - level) / (a - b);
                Some(x0 + w * self.grid.dx)
            } else {
                None
            }
        })
    }

    fn axis0_line(&self) -> (usize, usize, usize) {
        match self.dim() {
            1 => (self.grid.shape[0], 1, 0),
            _ => {
                let m = self.grid.shape[1];
                (self.grid.shape[0], m, m / 2)
            }
        }
    }

    /// Writes `<stem>.bin` (little-endian f64, row-major) and `<stem>.json`.
    pub fn write_snapshot(&self, dir: &Path, stem: &str) -> io::Result<()> {
        let mut bytes = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(dir.join(format!("{stem}.bin")), bytes)?;
        let header = SnapshotHeader {
            t: self.t,
            bounds: self.grid.bounds(),
            dx: self.grid.dx,
            d: self.dim(),
            shape: self.grid.shape.clone(),
            encoding: "f64-le-row-major".into(),
        };
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&header).expect("header serialises"),
        )
    }

    pub fn read_snapshot(dir: &Path, stem: &str) -> Result<Self, PdeError> {
        let text = fs::read_to_string(dir.join(format!("{stem}.json")))
            .map_err(|e| PdeError::Io(e.to_string()))?;
        let header: SnapshotHeader =
            serde_json::from_str(&text).map_err(|e| PdeError::Io(e.to_string()))?;
        let bytes =
            fs::read(dir.join(format!("{stem}.bin"))).map_err(|e| PdeError::Io(e.to_string()))?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let grid = Grid::new(&header.bounds, header.dx)?;
        Self::new(grid, header.t, values)
    }

    /// CSV `x,u` along axis 0 (through the middle row in 2-D).
    pub fn write_slice_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let (n, stride, offset) = self.axis0_line();
        writeln!(out, "x,u")?;
        for i in 0..n {
            writeln!(
                out,
                "{},{}",
                self.grid.coordinate(0, i),
                self.values[offset + i * stride]
            )?;
        }
        Ok(())
    }
}

/// `min{v_μ(t0, ·), 1}` on the grid: the upper envelope of the sandwich.
pub fn init_from_linearization(
    mu: &AtomicMeasure,
    t0: f64,
    grid: Grid,
    exec: Exec,
) -> Result<Field, PdeError> {
    if !(t0 < 0.0) {
        return Err(PdeError::BadStartTime(t0));
    }
    if grid.dim() != mu.dim() {
        return Err(PdeError::Dimension(grid.dim()));
    }
    let lin = LinField::new(mu);
    Field::from_fn(grid, t0, |x| lin.value(t0, x).min(1.0), exec)
}

//! Node-centred rectangular grids in up to three dimensions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("box must have between 1 and {max} axes, got {found}")]
    Dimension { found: usize, max: usize },
    #[error("axis {axis}: lo {lo} must be below hi {hi}")]
    EmptyAxis { axis: usize, lo: f64, hi: f64 },
    #[error("spacing {0} must be positive and finite")]
    Spacing(f64),
    #[error("axis {axis}: length {length} is not a multiple of dx = {dx}")]
    NotCovered { axis: usize, length: f64, dx: f64 },
}

/// Nodes at `lo_k + i·dx`, `i = 0..shape_k`, stored row-major (first axis
/// slowest). The last node of every axis sits exactly on `hi_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub dx: f64,
    pub shape: Vec<usize>,
}

impl Grid {
    pub const MAX_DIM: usize = 3;

    pub fn new(bounds: &[(f64, f64)], dx: f64) -> Result<Self, GridError> {
        if bounds.is_empty() || bounds.len() > Self::MAX_DIM {
            return Err(GridError::Dimension {
                found: bounds.len(),
                max: Self::MAX_DIM,
            });
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(GridError::Spacing(dx));
        }
        let mut shape = Vec::with_capacity(bounds.len());
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(GridError::EmptyAxis { axis, lo, hi });
            }
            let length = hi - lo;
            let cells = (length / dx).round();
            if (cells * dx - length).abs() > 1e-9 * length.max(1.0) {
                return Err(GridError::NotCovered { axis, length, dx });
            }
            shape.push(cells as usize + 1);
        }
        Ok(Grid {
            lo: bounds.iter().map(|b| b.0).collect(),
            hi: bounds.iter().map(|b| b.1).collect(),
            dx,
            shape,
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Length of the fastest-varying axis.
    pub fn row_len(&self) -> usize {
        *self.shape.last().expect("grid has at least one axis")
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.shape[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.dx
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.coordinate(k, i))
            .collect()
    }

    pub fn on_boundary(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.shape)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lo
            .iter()
            .cloned()
            .zip(self.hi.iter().cloned())
            .collect()
    }

    /// Same spacing and axis count (the box may differ).
    pub fn compatible(&self, other: &Grid) -> bool {
        self.dim() == other.dim() && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    /// Grid shifted by `cells` nodes along axis 0.
    pub fn shifted(&self, cells: isize) -> Grid {
        let off = cells as f64 * self.dx;
        let mut g = self.clone();
        g.lo[0] += off;
        g.hi[0] += off;
        g
    }

    /// Length of the cell diagonal, the resolution of grid-based distances.
    pub fn cell_diagonal(&self) -> f64 {
        self.dx * (self.dim() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_box_exactly() {
        let g = Grid::new(&[(-1.0, 1.0), (0.0, 0.5)], 0.1).unwrap();
        assert_eq!(g.shape, vec![21, 6]);
        assert_eq!(g.point(g.len() - 1), vec![1.0, 0.5]);
        assert_eq!(g.flat_index(&g.multi_index(37)), 37);
        assert!(matches!(
            Grid::new(&[(0.0, 1.0)], 0.3),
            Err(GridError::NotCovered { .. })
        ));
        assert!(Grid::new(&[(1.0, 0.0)], 0.1).is_err());
    }
}

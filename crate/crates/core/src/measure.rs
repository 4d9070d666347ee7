//! Finite atomic measures on the open unit ball.
//!
//! For a purely atomic μ the convex hull `ch(μ)` is simply the hull of the atom
//! positions: every essential support must contain every atom (each carries
//! positive mass) and the atom set itself is an essential support (it is
//! Lebesgue-null, so nothing Lebesgue-positive can be removed from it). No
//! essential-support enumeration is therefore needed.

use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Point, DUPLICATE_TOL};

/// On-disk form: `{"dimension": d, "atoms": [{"xi": [..], "w": ..}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub dimension: usize,
    pub atoms: Vec<RawAtom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAtom {
    pub xi: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    EmptyMeasure,
    ZeroDimension,
    DimensionMismatch { index: usize, found: usize },
    NonFinite { index: usize },
    AtomOutsideBall { index: usize, norm: f64 },
    NonpositiveWeight { index: usize, weight: f64 },
    DuplicateAtom { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyMeasure => write!(f, "measure has no atoms"),
            Violation::ZeroDimension => write!(f, "dimension must be at least 1"),
            Violation::DimensionMismatch { index, found } => {
                write!(f, "atom {index}: position has {found} coordinates")
            }
            Violation::NonFinite { index } => write!(f, "atom {index}: non-finite value"),
            Violation::AtomOutsideBall { index, norm } => {
                write!(f, "atom {index}: |xi| = {norm} is not < 1")
            }
            Violation::NonpositiveWeight { index, weight } => {
                write!(f, "atom {index}: weight {weight} is not > 0")
            }
            Violation::DuplicateAtom { first, second } => {
                write!(f, "atoms {first} and {second} coincide")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("invalid measure: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<Violation>),
    #[error("measure file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub xi: Point,
    pub weight: f64,
}

/// A validated finite atomic measure `Σ w_i δ_{ξ_i}` with `|ξ_i| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Duplicates {
    Merge,
    Reject,
}

fn check(spec: &MeasureSpec, dups: Duplicates) -> Result<AtomicMeasure, MeasureError> {
    let d = spec.dimension;
    let mut violations = Vec::new();
    if d == 0 {
        violations.push(Violation::ZeroDimension);
    }
    if spec.atoms.is_empty() {
        violations.push(Violation::EmptyMeasure);
    }
    for (i, a) in spec.atoms.iter().enumerate() {
        if a.xi.len() != d {
            violations.push(Violation::DimensionMismatch {
                index: i,
                found: a.xi.len(),
            });
            continue;
        }
        if !a.w.is_finite() || a.xi.iter().any(|v| !v.is_finite()) {
            violations.push(Violation::NonFinite { index: i });
            continue;
        }
        let r = crate::numerics::norm(&a.xi);
        if r >= 1.0 {
            violations.push(Violation::AtomOutsideBall { index: i, norm: r });
        }
        if a.w <= 0.0 {
            violations.push(Violation::NonpositiveWeight {
                index: i,
                weight: a.w,
            });
        }
    }
    if !violations.is_empty() {
        return Err(MeasureError::Rejected(violations));
    }

    let mut atoms: Vec<Atom> = Vec::with_capacity(spec.atoms.len());
    let mut origin_index: Vec<usize> = Vec::with_capacity(spec.atoms.len());
    for (i, a) in spec.atoms.iter().enumerate() {
        let p = Point(a.xi.clone());
        let dup = atoms
            .iter()
            .position(|b| crate::numerics::norm(&b.xi.sub(&p)) <= DUPLICATE_TOL);
        match (dup, dups) {
            (Some(k), Duplicates::Merge) => {
                warn!(
                    "atoms {} and {i} coincide; merging weights",
                    origin_index[k]
                );
                atoms[k].weight += a.w;
            }
            (Some(k), Duplicates::Reject) => violations.push(Violation::DuplicateAtom {
                first: origin_index[k],
                second: i,
            }),
            (None, _) => {
                atoms.push(Atom { xi: p, weight: a.w });
                origin_index.push(i);
            }
        }
    }
    if !violations.is_empty() {
        return Err(MeasureError::Rejected(violations));
    }
    Ok(AtomicMeasure { dim: d, atoms })
}

/// Validates a raw atom list, merging coincident atoms (within 1e-12) by
/// adding their weights.
pub fn validate(spec: &MeasureSpec) -> Result<AtomicMeasure, MeasureError> {
    check(spec, Duplicates::Merge)
}

/// Like [`validate`] but reports coincident atoms as `DuplicateAtom`.
pub fn validate_strict(spec: &MeasureSpec) -> Result<AtomicMeasure, MeasureError> {
    check(spec, Duplicates::Reject)
}

impl AtomicMeasure {
    /// Convenience constructor from `(position, weight)` pairs.
    pub fn from_atoms(dim: usize, atoms: &[(&[f64], f64)]) -> Result<Self, MeasureError> {
        validate(&MeasureSpec {
            dimension: dim,
            atoms: atoms
                .iter()
                .map(|(xi, w)| RawAtom {
                    xi: xi.to_vec(),
                    w: *w,
                })
                .collect(),
        })
    }

    /// Single atom `λ e_1` of unit weight with `0 < λ ≤ 1`.
    ///
    /// λ = 1 sits on the unit sphere and is outside the admissible family; it
    /// is accepted here only so that the planar critical-speed wave can drive a
    /// simulation (its linearisation `e^{-(x_1 - 2t)}` is perfectly regular).
    pub fn planar_wave(dim: usize, lambda: f64) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::Rejected(vec![Violation::ZeroDimension]));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(MeasureError::Rejected(vec![Violation::AtomOutsideBall {
                index: 0,
                norm: lambda,
            }]));
        }
        let mut xi = vec![0.0; dim];
        xi[0] = lambda;
        Ok(AtomicMeasure {
            dim,
            atoms: vec![Atom {
                xi: Point(xi),
                weight: 1.0,
            }],
        })
    }

    /// Midpoint quadrature of a density on `[-1,1]^d` with `cells` cells per
    /// axis; cells whose midpoint lies in the open unit ball and whose density
    /// is positive become atoms.
    pub fn from_density<F>(dim: usize, cells: usize, density: F) -> Result<Self, MeasureError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let h = 2.0 / cells as f64;
        let vol = h.powi(dim as i32);
        let total = cells.pow(dim as u32);
        let mut atoms = Vec::new();
        let mut mid = vec![0.0; dim];
        for flat in 0..total {
            let mut rem = flat;
            for m in mid.iter_mut().rev() {
                *m = -1.0 + h * ((rem % cells) as f64 + 0.5);
                rem /= cells;
            }
            if crate::numerics::norm(&mid) < 1.0 {
                let w = density(&mid) * vol;
                if w > 0.0 {
                    atoms.push(RawAtom { xi: mid.clone(), w });
                }
            }
        }
        validate(&MeasureSpec {
            dimension: dim,
            atoms,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, MeasureError> {
        let spec: MeasureSpec =
            serde_json::from_str(text).map_err(|e| MeasureError::Format(e.to_string()))?;
        validate(&spec)
    }

    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            dimension: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| RawAtom {
                    xi: a.xi.0.clone(),
                    w: a.weight,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("measure serialises")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.xi.clone()).collect()
    }

    /// `μ({0})`.
    pub fn origin_weight(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.xi.norm() == 0.0)
            .fold(0.0, |acc, a| acc + a.weight)
    }

    /// Atoms other than the one at the origin.
    pub fn nonzero_atoms(&self) -> Vec<&Atom> {
        self.atoms.iter().filter(|a| a.xi.norm() > 0.0).collect()
    }

    /// Total mass of atoms satisfying `pred`.
    pub fn mass_where<P: Fn(&Atom) -> bool>(&self, pred: P) -> f64 {
        self.atoms
            .iter()
            .filter(|a| pred(a))
            .map(|a| a.weight)
            .sum()
    }

    /// Same positions, weights multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0, "weight scale must be positive");
        AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    xi: a.xi.clone(),
                    weight: a.weight * factor,
                })
                .collect(),
        }
    }

    /// Applies a linear map (given row-major, d×d) to every position. Intended
    /// for rotations; the result is revalidated.
    pub fn mapped(&self, matrix: &[f64]) -> Result<Self, MeasureError> {
        let d = self.dim;
        assert_eq!(matrix.len(), d * d, "matrix must be d x d");
        let spec = MeasureSpec {
            dimension: d,
            atoms: self
                .atoms
                .iter()
                .map(|a| RawAtom {
                    xi: (0..d)
                        .map(|r| (0..d).map(|c| matrix[r * d + c] * a.xi[c]).sum())
                        .collect(),
                    w: a.weight,
                })
                .collect(),
        };
        validate(&spec)
    }

    /// `μ_y`: weights `w_i e^{-ξ_i·y}`, so that `v_μ(t, x + y) = v_{μ_y}(t, x)`.
    pub fn shifted_weights(&self, y: &[f64]) -> Self {
        AtomicMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    xi: a.xi.clone(),
                    weight: a.weight * (-a.xi.dot(y)).exp(),
                })
                .collect(),
        }
    }
}

/// Geometry of `supp(μ)` relevant to the classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportGeometry {
    /// `dist(supp μ, 0) = min_i |ξ_i|`.
    pub delta: f64,
    /// `max_i |ξ_i|`.
    pub outer: f64,
    pub origin_atom: bool,
    /// Extreme points of `ch(μ)`.
    pub hull: Vec<Point>,
}

pub fn support_geometry(mu: &AtomicMeasure) -> SupportGeometry {
    let radii: Vec<f64> = mu.atoms.iter().map(|a| a.xi.norm()).collect();
    let delta = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let outer = radii.iter().cloned().fold(0.0, f64::max);
    let positions = mu.positions();
    let hull = geometry::hull_vertices(&positions)
        .expect("validated measure has a nonempty, finite support")
        .into_iter()
        .map(|i| positions[i].clone())
        .collect();
    SupportGeometry {
        delta,
        outer,
        origin_atom: mu.origin_weight() > 0.0,
        hull,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, atoms: &[(&[f64], f64)]) -> MeasureSpec {
        MeasureSpec {
            dimension: d,
            atoms: atoms
                .iter()
                .map(|(xi, w)| RawAtom {
                    xi: xi.to_vec(),
                    w: *w,
                })
                .collect(),
        }
    }

    #[test]
    fn validation_examples() {
        assert!(validate(&spec(1, &[(&[0.5], 1.0)])).is_ok());
        assert_eq!(
            validate(&spec(1, &[(&[1.0], 1.0)])),
            Err(MeasureError::Rejected(vec![Violation::AtomOutsideBall {
                index: 0,
                norm: 1.0
            }]))
        );
        assert_eq!(
            validate(&spec(1, &[(&[0.3], -2.0)])),
            Err(MeasureError::Rejected(vec![Violation::NonpositiveWeight {
                index: 0,
                weight: -2.0
            }]))
        );
        assert_eq!(
            validate(&spec(2, &[])),
            Err(MeasureError::Rejected(vec![Violation::EmptyMeasure]))
        );
    }

    #[test]
    fn every_violation_is_listed() {
        let err = validate(&spec(2, &[(&[1.2, 0.0], -1.0), (&[0.1], 1.0)])).unwrap_err();
        let MeasureError::Rejected(v) = err else {
            panic!("expected rejection")
        };
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn duplicates_merge_or_reject() {
        let s = spec(1, &[(&[0.2], 1.0), (&[0.2], 0.5)]);
        let mu = validate(&s).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.total_mass(), 1.5);
        assert_eq!(
            validate_strict(&s),
            Err(MeasureError::Rejected(vec![Violation::DuplicateAtom {
                first: 0,
                second: 1
            }]))
        );
    }

    #[test]
    fn support_geometry_examples() {
        let mu = validate(&spec(1, &[(&[0.3], 1.0), (&[0.6], 1.0)])).unwrap();
        let g = support_geometry(&mu);
        assert_eq!(g.delta, 0.3);
        assert_eq!(g.outer, 0.6);
        assert!(!g.origin_atom);
        assert_eq!(g.hull.len(), 2);

        let mu = validate(&spec(2, &[(&[0.0, 0.0], 1.0), (&[0.5, 0.0], 1.0)])).unwrap();
        let g = support_geometry(&mu);
        assert!(g.origin_atom);
        assert_eq!(g.delta, 0.0);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mu = validate(&spec(
            2,
            &[
                (&[0.1 + 0.2, -1.0 / 3.0], 0.7),
                (&[1e-17, 0.123456789012345], 3.3),
            ],
        ))
        .unwrap();
        let back = AtomicMeasure::from_json(&mu.to_json()).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn density_ingestion_conserves_mass() {
        let mu = AtomicMeasure::from_density(2, 40, |_| 1.0).unwrap();
        // Mass of the unit disc, up to the staircase boundary.
        assert!((mu.total_mass() - std::f64::consts::PI).abs() < 0.1);
        assert!(mu.atoms().iter().all(|a| a.xi.norm() < 1.0));
    }

    #[test]
    fn planar_wave_allows_the_unit_sphere() {
        assert!(AtomicMeasure::planar_wave(1, 1.0).is_ok());
        assert!(AtomicMeasure::planar_wave(1, 1.1).is_err());
        assert!(AtomicMeasure::from_atoms(1, &[(&[1.0], 1.0)]).is_err());
    }
}

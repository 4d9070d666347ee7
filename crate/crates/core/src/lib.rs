//! Entire solutions of the Fisher-KPP equation `u_t = Δu + f(u)` built from
//! finite atomic measures `μ` on the open unit ball.
//!
//! * [`geometry`]: cones, separation, Carathéodory reduction, perturbation certificates.
//! * [`measure`]: the validated measure type and its support geometry.
//! * [`linfield`]: the linearised solution `v_μ` and its level sets.
//! * [`classifier`]: the front / bounded-width trichotomy with certified widths.
//! * [`pde`]: method-of-lines integration and calibration of the lower envelope `h`.
//! * [`widthlab`]: level sets, inclusion radii and width profiles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod exec;
pub mod geometry;
pub mod grid;
pub mod linfield;
pub mod measure;
pub mod numerics;
pub mod pde;
pub mod widthlab;

pub use exec::Exec;
pub use geometry::Point;
pub use grid::Grid;
pub use measure::AtomicMeasure;

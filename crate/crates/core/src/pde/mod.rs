//! Method-of-lines integration of `u_t = Δu + f(u)` started from the upper
//! envelope `min{v_μ, 1}`, and calibration of the lower envelope `h`.

pub mod calibrate;
pub mod field;
pub mod htable;
pub mod integrate;
pub mod reaction;
pub mod sandwich;

use thiserror::Error;

pub use calibrate::{estimate_h, CalibrationOptions};
pub use field::{init_from_linearization, Field, SnapshotHeader};
pub use htable::HTable;
pub use integrate::{
    integrate, ConstantBoundary, DirichletSource, FnBoundary, IntegrateOptions, MeasureBoundary,
    MovingWindow, Trajectory,
};
pub use reaction::ReactionFn;
pub use sandwich::{check_sandwich, min_time_increment, SandwichReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("cfl = {0} must lie in (0, 1]")]
    CflViolation(f64),
    #[error("non-finite value at node {index}, t = {t}")]
    NonFiniteValue { t: f64, index: usize },
    #[error("start time {0} must be negative")]
    BadStartTime(f64),
    #[error("end time {end} must exceed start time {start}")]
    BadEndTime { start: f64, end: f64 },
    #[error("fields of dimension {0} are not supported")]
    Dimension(usize),
    #[error("expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("calibration study disagrees by {diff} > {tol} at v = {v}")]
    NotConverged { diff: f64, tol: f64, v: f64 },
    #[error("{0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    HTable(#[from] htable::HTableError),
    #[error(transparent)]
    Measure(#[from] crate::measure::MeasureError),
    #[error(transparent)]
    LinField(#[from] crate::linfield::LinFieldError),
}

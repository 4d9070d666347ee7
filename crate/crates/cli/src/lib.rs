//! Batch front-end for `frontlab`. Every command writes its artifacts and a
//! `manifest.json` into one output directory; `report` reads them back.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod manifest;
pub mod report;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{resolve, Command, FieldError, Overrides, RunConfig};
pub use manifest::Manifest;
pub use report::report;
pub use run::run_experiment;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    ConfigInvalid(Vec<FieldError>),
    #[error("no readable manifest.json in {}", .0.display())]
    MissingManifest(PathBuf),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] frontlab::geometry::GeometryError),
    #[error(transparent)]
    Classifier(#[from] frontlab::classifier::ClassifierError),
    #[error(transparent)]
    Pde(#[from] frontlab::pde::PdeError),
    #[error(transparent)]
    Width(#[from] frontlab::widthlab::WidthError),
}

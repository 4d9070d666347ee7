//! Run configuration: flags and an optional JSON file merged into one
//! validated [`RunConfig`].

use std::fmt;
use std::path::{Path, PathBuf};

use frontlab::pde::ReactionFn;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Simulate,
    WidthReport,
    CertifyGeometry,
    CalibrateH,
    H2Diagnose,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Simulate => "simulate",
            Command::WidthReport => "width-report",
            Command::CertifyGeometry => "certify-geometry",
            Command::CalibrateH => "calibrate-h",
            Command::H2Diagnose => "h2-diagnose",
        }
    }

    fn needs_measure(self) -> bool {
        !matches!(self, Command::CertifyGeometry | Command::CalibrateH)
    }

    fn needs_box(self) -> bool {
        matches!(self, Command::Simulate | Command::WidthReport)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every knob of a run. Field names double as the JSON keys of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub measure: Option<PathBuf>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// One `[lo, hi]` pair per axis.
    #[serde(default, rename = "box")]
    pub bbox: Vec<[f64; 2]>,
    #[serde(default = "default_dx")]
    pub dx: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Empty means every integer time in `(t0, t_end]` plus `t_end`.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub reaction: ReactionFn,
    #[serde(default)]
    pub seed: u64,
    pub out: PathBuf,
    /// Keep the half-level crossing at a fixed place along the first axis.
    #[serde(default)]
    pub window: bool,
    /// Precomputed `h` table; calibrated at `dx` from `lambdas` when absent.
    #[serde(default)]
    pub h_table: Option<PathBuf>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Cells of far-field padding in width reports.
    #[serde(default)]
    pub far_field_pad: usize,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
}

fn default_eps() -> Vec<f64> {
    vec![0.1]
}
fn default_dx() -> f64 {
    0.1
}
fn default_t0() -> f64 {
    -12.0
}
fn default_t_end() -> f64 {
    10.0
}
fn default_lambdas() -> Vec<f64> {
    vec![0.5]
}
fn default_instances() -> usize {
    50
}
fn default_trials() -> usize {
    10_000
}
fn default_dimension() -> usize {
    2
}

/// One offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn field(name: &str, message: impl Into<String>) -> FieldError {
    FieldError {
        field: name.into(),
        message: message.into(),
    }
}

/// Flags given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub measure: Option<PathBuf>,
    pub eps: Option<Vec<f64>>,
    pub bbox: Option<Vec<f64>>,
    pub dx: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub reaction: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub window: bool,
    pub h_table: Option<PathBuf>,
    pub lambdas: Option<Vec<f64>>,
    pub far_field_pad: Option<usize>,
    pub instances: Option<usize>,
    pub trials: Option<usize>,
    pub dimension: Option<usize>,
}

impl Overrides {
    fn to_json(&self) -> Result<Map<String, Value>, Vec<FieldError>> {
        let mut m = Map::new();
        let mut errors = Vec::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.into(), v);
        };
        if let Some(p) = &self.measure {
            put("measure", Value::from(p.to_string_lossy().into_owned()));
        }
        if let Some(e) = &self.eps {
            put("eps", Value::from(e.clone()));
        }
        if let Some(b) = &self.bbox {
            if b.len() % 2 != 0 {
                errors.push(field("box", "expects lo,hi pairs, one per axis"));
            } else {
                put(
                    "box",
                    Value::from(b.chunks(2).map(|c| vec![c[0], c[1]]).collect::<Vec<_>>()),
                );
            }
        }
        if let Some(v) = self.dx {
            put("dx", Value::from(v));
        }
        if let Some(v) = self.t0 {
            put("t0", Value::from(v));
        }
        if let Some(v) = self.t_end {
            put("t_end", Value::from(v));
        }
        if let Some(v) = &self.snapshot_times {
            put("snapshot_times", Value::from(v.clone()));
        }
        if let Some(r) = &self.reaction {
            match serde_json::from_str::<Value>(r) {
                Ok(v @ Value::Object(_)) => put("reaction", v),
                _ => put("reaction", serde_json::json!({ "name": r })),
            }
        }
        if let Some(v) = self.seed {
            put("seed", Value::from(v));
        }
        if let Some(p) = &self.out {
            put("out", Value::from(p.to_string_lossy().into_owned()));
        }
        if self.window {
            put("window", Value::from(true));
        }
        if let Some(p) = &self.h_table {
            put("h_table", Value::from(p.to_string_lossy().into_owned()));
        }
        if let Some(v) = &self.lambdas {
            put("lambdas", Value::from(v.clone()));
        }
        if let Some(v) = self.far_field_pad {
            put("far_field_pad", Value::from(v));
        }
        if let Some(v) = self.instances {
            put("instances", Value::from(v));
        }
        if let Some(v) = self.trials {
            put("trials", Value::from(v));
        }
        if let Some(v) = self.dimension {
            put("dimension", Value::from(v));
        }
        if errors.is_empty() {
            Ok(m)
        } else {
            Err(errors)
        }
    }
}

/// Flags first, then every key of the config file on top, then validation.
pub fn resolve(
    command: Command,
    flags: &Overrides,
    file: Option<&Path>,
) -> Result<RunConfig, CliError> {
    let mut merged = flags.to_json().map_err(CliError::ConfigInvalid)?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::ConfigInvalid(vec![field("config", format!("{}: {e}", path.display()))])
        })?;
        let Value::Object(obj) = serde_json::from_str::<Value>(&text).map_err(|e| {
            CliError::ConfigInvalid(vec![field("config", format!("{}: {e}", path.display()))])
        })?
        else {
            return Err(CliError::ConfigInvalid(vec![field(
                "config",
                "must be a JSON object",
            )]));
        };
        for (k, v) in obj {
            merged.insert(k, v);
        }
    }
    match merged.get("command") {
        Some(Value::String(c)) if c != command.as_str() => {
            return Err(CliError::ConfigInvalid(vec![field(
                "command",
                format!("config file says {c:?} but {command} was requested"),
            )]));
        }
        _ => {
            merged.insert("command".into(), Value::from(command.as_str()));
        }
    }
    if !merged.contains_key("out") {
        return Err(CliError::ConfigInvalid(vec![field(
            "out",
            "an output directory is required",
        )]));
    }
    let cfg: RunConfig = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::ConfigInvalid(vec![field("config", e.to_string())]))?;
    let errors = cfg.problems();
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::ConfigInvalid(errors))
    }
}

impl RunConfig {
    /// Every violated invariant, by field.
    pub fn problems(&self) -> Vec<FieldError> {
        let mut e = Vec::new();
        match (&self.measure, self.command.needs_measure()) {
            (None, true) => e.push(field(
                "measure",
                format!("{} needs a measure file", self.command),
            )),
            (Some(p), _) if !p.is_file() => {
                e.push(field("measure", format!("{} does not exist", p.display())))
            }
            _ => {}
        }
        if let Some(p) = &self.h_table {
            if !p.is_file() {
                e.push(field("h_table", format!("{} does not exist", p.display())));
            }
        }
        if self.eps.is_empty() {
            e.push(field("eps", "at least one level is required"));
        }
        for &x in &self.eps {
            if !(x > 0.0 && x < 0.5) {
                e.push(field("eps", format!("{x} is outside (0, 1/2)")));
            }
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            e.push(field("dx", format!("{} must be positive", self.dx)));
        }
        if !(self.t0 < 0.0) {
            e.push(field("t0", format!("{} must be negative", self.t0)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            e.push(field("t_end", format!("{} must be positive", self.t_end)));
        }
        for &t in &self.snapshot_times {
            if !(t > self.t0 && t <= self.t_end) {
                e.push(field(
                    "snapshot_times",
                    format!("{t} is outside (t0, t_end]"),
                ));
            }
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            e.push(field("snapshot_times", "must be strictly increasing"));
        }
        if self.command.needs_box() {
            if self.bbox.is_empty() {
                e.push(field("box", format!("{} needs a box", self.command)));
            }
            for (axis, [lo, hi]) in self.bbox.iter().enumerate() {
                if !(lo < hi) {
                    e.push(field("box", format!("axis {axis}: {lo} is not below {hi}")));
                }
            }
        }
        if let Err(msgs) = self.reaction.validate() {
            e.extend(msgs.into_iter().map(|m| field("reaction", m)));
        }
        for &l in &self.lambdas {
            if !(l > 0.0 && l < 1.0) {
                e.push(field("lambdas", format!("{l} is outside (0, 1)")));
            }
        }
        if self.lambdas.is_empty() {
            e.push(field("lambdas", "at least one decay rate is required"));
        }
        if self.command == Command::CertifyGeometry {
            if !(1..=6).contains(&self.dimension) {
                e.push(field(
                    "dimension",
                    format!("{} is outside 1..=6", self.dimension),
                ));
            }
            if self.instances == 0 {
                e.push(field("instances", "must be positive"));
            }
        }
        e
    }

    /// Snapshot times, filled in when none were given.
    pub fn times(&self) -> Vec<f64> {
        if !self.snapshot_times.is_empty() {
            return self.snapshot_times.clone();
        }
        let mut t: Vec<f64> = ((self.t0.floor() as i64 + 1)..=(self.t_end.floor() as i64))
            .map(|k| k as f64)
            .filter(|&k| k > self.t0)
            .collect();
        if t.last() != Some(&self.t_end) {
            t.push(self.t_end);
        }
        t
    }
}

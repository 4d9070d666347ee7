//! The six experiment commands. Each one fills an [`Artifacts`] directory and
//! returns checks and headline numbers for the manifest.

use std::fs;
use std::time::Instant;

use frontlab::classifier::{self, Verdict};
use frontlab::geometry::{
    caratheodory_reduce, interior_radius, is_interior, positive_combination, sample_ball,
    wiggle_radius, Point,
};
use frontlab::pde::{
    check_sandwich, estimate_h, init_from_linearization, integrate, min_time_increment,
    CalibrationOptions, Field, HTable, IntegrateOptions, MeasureBoundary, MovingWindow, Trajectory,
};
use frontlab::widthlab::{width_profile, FarField, WidthOptions};
use frontlab::{AtomicMeasure, Exec, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Command, FieldError, RunConfig};
use crate::manifest::{sha256_hex, Artifacts, Check, Manifest, Summary, MANIFEST};
use crate::CliError;

/// Snapshots earlier than this after `t0` are excluded from the
/// monotonicity check; the initial kink of `min{v, 1}` decays over it.
pub const BURN_IN: f64 = 6.0;
pub const SANDWICH_LOWER_TOL: f64 = 5e-3;
pub const SANDWICH_UPPER_TOL: f64 = 1e-6;
pub const MONOTONICITY_TOL: f64 = 1e-6;

/// Independent generator number `stream` derived from the run seed.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Outcome {
    checks: Vec<Check>,
    summary: Summary,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn invalid(name: &str, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid(vec![FieldError {
        field: name.into(),
        message: message.into(),
    }])
}

/// Runs `cfg.command`, writes every artifact plus `manifest.json`.
pub fn run_experiment(cfg: &RunConfig) -> Result<Manifest, CliError> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(CliError::ConfigInvalid(problems));
    }
    let clock = Instant::now();
    let mut arts = Artifacts::create(&cfg.out)?;
    let (mu, measure_sha256) = match &cfg.measure {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let mu =
                AtomicMeasure::from_json(&text).map_err(|e| invalid("measure", e.to_string()))?;
            (Some(mu), Some(sha256_hex(text.as_bytes())))
        }
        None => (None, None),
    };
    let out = match cfg.command {
        Command::Classify => classify(cfg, mu.as_ref().expect("validated"), &mut arts)?,
        Command::Simulate => simulate(cfg, mu.as_ref().expect("validated"), &mut arts)?.0,
        Command::WidthReport => width_report(cfg, mu.as_ref().expect("validated"), &mut arts)?,
        Command::CertifyGeometry => certify_geometry(cfg, mu.as_ref(), &mut arts)?,
        Command::CalibrateH => {
            h_table(cfg, &mut arts)?;
            Outcome::new()
        }
        Command::H2Diagnose => h2_diagnose(cfg, mu.as_ref().expect("validated"), &mut arts)?,
    };
    let config_bytes = serde_json::to_vec(cfg).expect("config serialises");
    let manifest = Manifest {
        tool: "frontlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.as_str().into(),
        config: cfg.clone(),
        config_sha256: sha256_hex(&config_bytes),
        measure_sha256,
        threads: rayon::current_num_threads(),
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        files: arts.files.clone(),
        checks: out.checks,
        summary: out.summary,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    fs::write(cfg.out.join(MANIFEST), text)?;
    Ok(manifest)
}

fn classify(
    _cfg: &RunConfig,
    mu: &AtomicMeasure,
    arts: &mut Artifacts,
) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let c = classifier::classify(mu)?;
    arts.write_json("classification.json", &c)?;
    if c.verdict == Verdict::H3BoundedNotFront {
        let k = classifier::structure_constants(mu, Exec::default())?;
        arts.write_json("structure_constants.json", &k)?;
    }
    out.summary.verdict = Some(c.verdict.as_str().into());
    Ok(out)
}

/// The table from `h_table`, or a fresh calibration at the run's `dx`.
fn h_table(cfg: &RunConfig, arts: &mut Artifacts) -> Result<HTable, CliError> {
    let h = match &cfg.h_table {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .map_err(|e| invalid("h_table", e.to_string()))?,
        None => estimate_h(
            &cfg.reaction,
            &cfg.lambdas,
            &CalibrationOptions {
                dx: cfg.dx,
                ..Default::default()
            },
        )?,
    };
    arts.write_json("h_table.json", &h)?;
    Ok(h)
}

#[derive(Serialize)]
struct TrajectoryInfo {
    times: Vec<f64>,
    steps: usize,
    dt: f64,
    max_excursion: f64,
    shift_cells: usize,
    /// Half-level crossing along the first axis (1-D runs only).
    front_positions: Option<Vec<Option<f64>>>,
    min_increment_all: f64,
    min_increment_after_burn_in: f64,
}

fn simulate(
    cfg: &RunConfig,
    mu: &AtomicMeasure,
    arts: &mut Artifacts,
) -> Result<(Outcome, Trajectory, HTable), CliError> {
    let mut out = Outcome::new();
    if cfg.bbox.len() != mu.dim() {
        return Err(invalid(
            "box",
            format!(
                "{} axes given for a measure in dimension {}",
                cfg.bbox.len(),
                mu.dim()
            ),
        ));
    }
    let bounds: Vec<(f64, f64)> = cfg.bbox.iter().map(|b| (b[0], b[1])).collect();
    let grid = Grid::new(&bounds, cfg.dx).map_err(|e| invalid("box", e.to_string()))?;
    let h = h_table(cfg, arts)?;
    let field = init_from_linearization(mu, cfg.t0, grid, Exec::default())?;
    let run = integrate(
        field,
        &cfg.reaction,
        &MeasureBoundary::new(mu),
        cfg.t_end,
        &IntegrateOptions {
            snapshot_times: cfg.times(),
            window: cfg.window.then(MovingWindow::default),
            ..Default::default()
        },
    )?;
    for (k, s) in run.snapshots.iter().enumerate() {
        let stem = format!("t{k:04}");
        let dir = arts.dir.join("snapshots");
        fs::create_dir_all(&dir)?;
        s.write_snapshot(&dir, &stem)?;
        arts.adopt(&format!("snapshots/{stem}.bin"))?;
        arts.adopt(&format!("snapshots/{stem}.json"))?;
    }
    let settled: Vec<Field> = run
        .snapshots
        .iter()
        .filter(|s| s.t >= cfg.t0 + BURN_IN)
        .cloned()
        .collect();
    let mono = min_time_increment(&settled);
    let info = TrajectoryInfo {
        times: run.snapshots.iter().map(|s| s.t).collect(),
        steps: run.steps,
        dt: run.dt,
        max_excursion: run.max_excursion,
        shift_cells: run.shift_cells,
        front_positions: (mu.dim() == 1).then(|| {
            run.snapshots
                .iter()
                .map(|s| s.front_position(0.5))
                .collect()
        }),
        min_increment_all: finite_or_none(min_time_increment(&run.snapshots)),
        min_increment_after_burn_in: finite_or_none(mono),
    };
    arts.write_json("trajectory.json", &info)?;
    let rep = check_sandwich(&run.snapshots, mu, &h, Exec::default());
    arts.write_json("sandwich.json", &rep)?;
    out.check(
        "sandwich_lower",
        rep.lower <= SANDWICH_LOWER_TOL,
        format!(
            "max (h(v)-u)+ = {:.3e} (tolerance {SANDWICH_LOWER_TOL:e})",
            rep.lower
        ),
    );
    out.check(
        "sandwich_upper",
        rep.upper <= SANDWICH_UPPER_TOL,
        format!(
            "max (u-min(v,1))+ = {:.3e} (tolerance {SANDWICH_UPPER_TOL:e})",
            rep.upper
        ),
    );
    if settled.len() >= 2 {
        out.check(
            "monotonicity",
            mono >= -MONOTONICITY_TOL,
            format!(
                "min u(t+Δ)-u(t) = {mono:.3e} over {} snapshots with t ≥ t0 + {BURN_IN}",
                settled.len()
            ),
        );
    }
    out.summary.sandwich_lower = Some(rep.lower);
    out.summary.sandwich_upper = Some(rep.upper);
    out.summary.min_increment = (settled.len() >= 2).then_some(mono);
    Ok((out, run, h))
}

/// `+∞` (no pairs compared) is stored as 0 so the JSON stays numeric.
fn finite_or_none(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

fn width_report(
    cfg: &RunConfig,
    mu: &AtomicMeasure,
    arts: &mut Artifacts,
) -> Result<Outcome, CliError> {
    let (mut out, run, h) = simulate(cfg, mu, arts)?;
    let class = classifier::classify(mu)?;
    arts.write_json("classification.json", &class)?;
    out.summary.verdict = Some(class.verdict.as_str().into());
    let graph = class.verdict == Verdict::H1FrontAndBounded && mu.dim() <= 2;
    let graph_bound = if graph {
        let half = h.h(0.5);
        classifier::certified_width_bound(mu, half, &h, Exec::default())?.l_eps
    } else {
        None
    };
    for (i, &eps) in cfg.eps.iter().enumerate() {
        let tag = eps_tag(eps);
        let cert = match class.verdict {
            Verdict::HalfSpaceEdge => None,
            _ => {
                let c = classifier::certified_width_bound(mu, eps, &h, Exec::default())?;
                arts.write_json(&format!("certificate_{tag}.json"), &c)?;
                Some(c)
            }
        };
        let prof = width_profile(
            &run.snapshots,
            mu,
            eps,
            &WidthOptions {
                far_field: (cfg.far_field_pad > 0).then_some(FarField {
                    h: &h,
                    pad: cfg.far_field_pad,
                }),
                graph,
                graph_bound,
                exec: Exec::default(),
            },
        )?;
        let mut csv = Vec::new();
        prof.write_csv(&mut csv)?;
        arts.write(&format!("width_{tag}.csv"), &csv)?;
        let certified = cert.as_ref().and_then(|c| c.l_eps);
        if let Some(bound) = certified {
            out.check(
                format!("width_bound_{tag}"),
                prof.max_l() <= bound,
                format!("max L = {:.4} vs certified {bound:.4}", prof.max_l()),
            );
        }
        if graph {
            let ok = prof.rows.iter().all(|r| r.graph_ok == Some(true));
            out.check(
                format!("graph_{tag}"),
                ok,
                format!(
                    "max graph_L = {:.4} vs certified L_h(1/2) = {} plus one cell",
                    prof.max_graph_l().unwrap_or(f64::NAN),
                    graph_bound.map_or("none".to_string(), |b| format!("{b:.4}"))
                ),
            );
        }
        let growth: Vec<(f64, f64)> = [10.0, 20.0, 40.0]
            .iter()
            .filter_map(|&t| prof.l_at(t).map(|l| (t, l)))
            .collect();
        if class.verdict == Verdict::H2Neither && growth.len() == 3 {
            let l: Vec<f64> = growth.iter().map(|g| g.1).collect();
            out.check(
                format!("width_growth_{tag}"),
                l[0] < l[1] && l[1] < l[2] && l[2] > 1.5 * l[0],
                format!(
                    "L(10) = {:.4}, L(20) = {:.4}, L(40) = {:.4}",
                    l[0], l[1], l[2]
                ),
            );
        }
        if i == 0 {
            out.summary.epsilon = Some(eps);
            out.summary.certified_l = certified;
            out.summary.empirical_max_l = Some(prof.max_l());
            out.summary.empirical_max_l_prime = Some(prof.max_l_prime());
            out.summary.l_growth = growth;
        }
    }
    Ok(out)
}

/// Centred random points whose hull holds a ball of radius 0.05 about 0.
fn surrounding_set(rng: &mut ChaCha8Rng, d: usize, count: usize) -> Result<Vec<Point>, CliError> {
    let origin = vec![0.0; d];
    loop {
        let mut pts: Vec<Point> = (0..count).map(|_| sample_ball(rng, d, 1.0)).collect();
        let centroid: Vec<f64> = (0..d)
            .map(|a| pts.iter().map(|x| x[a]).sum::<f64>() / count as f64)
            .collect();
        for x in pts.iter_mut() {
            *x = x.sub(&centroid);
        }
        if is_interior(&pts, &origin)? && interior_radius(&pts)? > 0.05 {
            return Ok(pts);
        }
    }
}

#[derive(Serialize)]
struct GeometryInstance {
    points: Vec<Point>,
    caratheodory: Vec<usize>,
    coefficients_residual: f64,
    certificate: frontlab::geometry::WiggleCertificate,
    trials: usize,
    failures: usize,
}

fn instance(
    points: Vec<Point>,
    trials: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GeometryInstance, CliError> {
    let d = points[0].dim();
    let caratheodory = caratheodory_reduce(&points, &vec![0.0; d])?;
    let c = positive_combination(&points)?;
    let scale: f64 = points.iter().zip(&c).map(|(x, w)| w * x.norm()).sum();
    let mut r = vec![0.0; d];
    for (x, w) in points.iter().zip(&c) {
        for (ra, xa) in r.iter_mut().zip(x.coords()) {
            *ra += w * xa;
        }
    }
    let certificate = wiggle_radius(&points)?;
    let rep = certificate.validate(&points, trials, rng, Exec::default())?;
    Ok(GeometryInstance {
        caratheodory,
        coefficients_residual: frontlab::numerics::norm(&r) / scale,
        certificate,
        trials,
        failures: rep.failures,
        points,
    })
}

fn certify_geometry(
    cfg: &RunConfig,
    mu: Option<&AtomicMeasure>,
    arts: &mut Artifacts,
) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let d = cfg.dimension;
    let mut instances = Vec::with_capacity(cfg.instances);
    for k in 0..cfg.instances {
        let mut points_rng = stream(cfg.seed, 2 * k as u64);
        let mut trial_rng = stream(cfg.seed, 2 * k as u64 + 1);
        let count = d + 1 + points_rng.random_range(0..4);
        let pts = surrounding_set(&mut points_rng, d, count)?;
        instances.push(instance(pts, cfg.trials, &mut trial_rng)?);
    }
    let measure_instance = match mu {
        Some(m) if classifier::classify(m)?.verdict == Verdict::H3BoundedNotFront => {
            let mut rng = stream(cfg.seed, u64::MAX);
            Some(instance(
                m.nonzero_atoms().iter().map(|a| a.xi.clone()).collect(),
                cfg.trials,
                &mut rng,
            )?)
        }
        _ => None,
    };
    let all: Vec<&GeometryInstance> = instances.iter().chain(measure_instance.as_ref()).collect();
    let failures: usize = all.iter().map(|i| i.failures).sum();
    let worst_residual = all
        .iter()
        .map(|i| i.coefficients_residual)
        .fold(0.0, f64::max);
    let card_ok = all
        .iter()
        .all(|i| i.caratheodory.len() <= 2 * i.points[0].dim());
    out.check(
        "wiggle_monte_carlo",
        failures == 0,
        format!(
            "{} certificates × {} perturbations: {failures} failures",
            all.len(),
            cfg.trials
        ),
    );
    out.check(
        "positive_combination",
        worst_residual <= 1e-9,
        format!("max relative residual {worst_residual:.3e}"),
    );
    out.check(
        "caratheodory",
        card_ok,
        format!("every reduction has at most {} points", 2 * d),
    );
    arts.write_json("geometry.json", &instances)?;
    if let Some(m) = &measure_instance {
        arts.write_json("measure_geometry.json", m)?;
    }
    Ok(out)
}

fn h2_diagnose(
    cfg: &RunConfig,
    mu: &AtomicMeasure,
    arts: &mut Artifacts,
) -> Result<Outcome, CliError> {
    let mut out = Outcome::new();
    let class = classifier::classify(mu)?;
    out.summary.verdict = Some(class.verdict.as_str().into());
    if class.verdict != Verdict::H2Neither {
        return Err(invalid(
            "measure",
            format!(
                "h2-diagnose needs an H2 measure, got {}",
                class.verdict.as_str()
            ),
        ));
    }
    let h = h_table(cfg, arts)?;
    let times: Vec<f64> = cfg.times().into_iter().filter(|t| *t >= 0.0).collect();
    let delta = class.delta.max(
        mu.nonzero_atoms()
            .iter()
            .map(|a| a.xi.norm())
            .fold(f64::INFINITY, f64::min),
    ) / 2.0;
    for &eps in &cfg.eps {
        let tag = eps_tag(eps);
        let diag = classifier::h2_divergence_diagnostic(mu, eps, delta, &times, &h)?;
        arts.write_json(&format!("h2_diagnostic_{tag}.json"), &diag)?;
        out.check(
            format!("s_exceeds_r_{tag}"),
            diag.s_exceeds_r_everywhere,
            format!("s_t > r_t at {} sampled times", diag.samples.len()),
        );
        out.check(
            format!("v1_bound_{tag}"),
            diag.v1_bound_everywhere,
            "v1(t, Y(t)) ≤ e^-t at every sampled time",
        );
    }
    Ok(out)
}

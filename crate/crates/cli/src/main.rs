use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frontlab_cli::{report, resolve, run_experiment, CliError, Command, Overrides};

#[derive(Parser)]
#[command(
    name = "frontlab",
    version,
    about = "Fisher-KPP entire solutions from atomic measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trichotomy verdict with its geometric certificate.
    Classify(RunArgs),
    /// Integrate from the linearised datum and check the sandwich bounds.
    Simulate(RunArgs),
    /// Simulate, then write width profiles and certified bounds.
    WidthReport(RunArgs),
    /// Perturbation certificates for seeded random point sets.
    CertifyGeometry(RunArgs),
    /// Calibrate the lower envelope h from planar runs.
    CalibrateH(RunArgs),
    /// Divergence diagnostics for a measure with an atom at the origin.
    H2Diagnose(RunArgs),
    /// Summarise an artifact directory; exits 1 if any check failed.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Comma-separated levels in (0, 1/2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eps: Option<Vec<f64>>,
    /// lo,hi per axis, e.g. -40,40,-40,40.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true)]
    bbox: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    dx: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long = "times", value_delimiter = ',', allow_hyphen_values = true)]
    snapshot_times: Option<Vec<f64>>,
    /// `fisher`, `zero`, or a JSON object such as {"name":"power","gamma":2}.
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file whose keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window: bool,
    #[arg(long)]
    h_table: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long)]
    far_field_pad: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    dimension: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            measure: self.measure.clone(),
            eps: self.eps.clone(),
            bbox: self.bbox.clone(),
            dx: self.dx,
            t0: self.t0,
            t_end: self.t_end,
            snapshot_times: self.snapshot_times.clone(),
            reaction: self.reaction.clone(),
            seed: self.seed,
            out: self.out.clone(),
            window: self.window,
            h_table: self.h_table.clone(),
            lambdas: self.lambdas.clone(),
            far_field_pad: self.far_field_pad,
            instances: self.instances,
            trials: self.trials,
            dimension: self.dimension,
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FRONTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::ConfigInvalid(vec![frontlab_cli::FieldError {
            field: "FRONTLAB_THREADS".into(),
            message: format!("{raw:?} is not a positive integer"),
        }])
    })?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (command, args) = match cli.command {
        Cmd::Report { dir } => {
            let r = report(&dir)?;
            print!("{}", r.text);
            return Ok(r.passed);
        }
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::WidthReport(a) => (Command::WidthReport, a),
        Cmd::CertifyGeometry(a) => (Command::CertifyGeometry, a),
        Cmd::CalibrateH(a) => (Command::CalibrateH, a),
        Cmd::H2Diagnose(a) => (Command::H2Diagnose, a),
    };
    let cfg = resolve(command, &args.overrides(), args.config.as_deref())?;
    log::info!("running {} into {}", cfg.command, cfg.out.display());
    let m = run_experiment(&cfg)?;
    println!(
        "{} artifacts in {} ({:.1} s)",
        m.files.len() + 1,
        cfg.out.display(),
        m.wall_clock_seconds
    );
    for c in &m.checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(m.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use frontlab_cli::manifest::{sha256_hex, MANIFEST};
use frontlab_cli::{report, resolve, run_experiment, CliError, Command, Manifest, Overrides};
use tempfile::TempDir;

fn measure(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../measures")
        .join(name)
}

fn flags(measure_file: Option<&str>, out: &Path) -> Overrides {
    Overrides {
        measure: measure_file.map(measure),
        out: Some(out.to_path_buf()),
        ..Default::default()
    }
}

fn field_names(err: CliError) -> Vec<String> {
    match err {
        CliError::ConfigInvalid(fields) => fields.into_iter().map(|f| f.field).collect(),
        other => panic!("expected ConfigInvalid, got {other}"),
    }
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_frontlab"))
}

#[test]
fn classify_h2_example_carries_a_cone_certificate() {
    let dir = TempDir::new().unwrap();
    let cfg = resolve(
        Command::Classify,
        &flags(Some("origin_1d.json"), dir.path()),
        None,
    )
    .unwrap();
    let m = run_experiment(&cfg).unwrap();
    assert!(m.passed());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("classification.json")).unwrap())
            .unwrap();
    assert_eq!(json["verdict"], "H2_Neither");
    assert_eq!(json["certificate"]["kind"], "cone");
    assert_eq!(m.summary.verdict.as_deref(), Some("H2_Neither"));
}

#[test]
fn classify_triangle_writes_structure_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = resolve(
        Command::Classify,
        &flags(Some("triangle_2d.json"), dir.path()),
        None,
    )
    .unwrap();
    let m = run_experiment(&cfg).unwrap();
    assert_eq!(m.summary.verdict.as_deref(), Some("H3_BoundedNotFront"));
    assert!(dir.path().join("structure_constants.json").exists());
}

#[test]
fn invalid_fields_are_all_named() {
    let dir = TempDir::new().unwrap();
    let mut f = flags(None, dir.path());
    f.dx = Some(-0.1);
    f.t0 = Some(2.0);
    f.eps = Some(vec![0.7]);
    let names = field_names(resolve(Command::WidthReport, &f, None).unwrap_err());
    for want in ["measure", "dx", "t0", "eps", "box"] {
        assert!(
            names.iter().any(|n| n == want),
            "{want} missing from {names:?}"
        );
    }
}

#[test]
fn config_file_keys_override_flags_and_unknown_keys_fail() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("run.json");
    fs::write(&file, r#"{"command": "classify", "dx": 0.25}"#).unwrap();
    let mut f = flags(Some("front_1d.json"), &dir.path().join("out"));
    f.dx = Some(0.5);
    assert_eq!(
        resolve(Command::Classify, &f, Some(&file)).unwrap().dx,
        0.25
    );

    fs::write(&file, r#"{"command": "classify", "grid": 3}"#).unwrap();
    assert_eq!(
        field_names(resolve(Command::Classify, &f, Some(&file)).unwrap_err()),
        ["config"]
    );

    fs::write(&file, r#"{"command": "simulate"}"#).unwrap();
    assert!(resolve(Command::Classify, &f, Some(&file)).is_err());
}

#[test]
fn missing_out_directory_is_rejected() {
    let names = field_names(resolve(Command::Classify, &Overrides::default(), None).unwrap_err());
    assert!(names.contains(&"out".to_string()));
}

#[test]
fn report_without_manifest_is_an_error() {
    let dir = TempDir::new().unwrap();
    assert!(matches!(
        report(dir.path()),
        Err(CliError::MissingManifest(_))
    ));
}

#[test]
fn certify_geometry_passes_and_is_deterministic() {
    let run = |dir: &Path| {
        let mut f = flags(None, dir);
        f.dimension = Some(3);
        f.instances = Some(8);
        f.trials = Some(500);
        f.seed = Some(11);
        run_experiment(&resolve(Command::CertifyGeometry, &f, None).unwrap()).unwrap()
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (ma, mb) = (run(a.path()), run(b.path()));
    assert!(ma.passed(), "{:?}", ma.checks);
    assert_eq!(ma.files, mb.files);
    for f in &ma.files {
        assert_eq!(
            fs::read(a.path().join(&f.path)).unwrap(),
            fs::read(b.path().join(&f.path)).unwrap()
        );
    }
}

fn width_report_1d(dir: &Path) -> Manifest {
    let mut f = flags(Some("front_1d.json"), dir);
    f.bbox = Some(vec![-30.0, 30.0]);
    f.dx = Some(0.1);
    f.t0 = Some(-10.0);
    f.t_end = Some(6.0);
    f.eps = Some(vec![0.1, 0.25]);
    f.far_field_pad = Some(40);
    run_experiment(&resolve(Command::WidthReport, &f, None).unwrap()).unwrap()
}

#[test]
fn width_report_h1_stays_below_the_certified_width() {
    let dir = TempDir::new().unwrap();
    let m = width_report_1d(dir.path());
    assert!(m.passed(), "{:?}", m.checks);
    let (emp, cert) = (
        m.summary.empirical_max_l.unwrap(),
        m.summary.certified_l.unwrap(),
    );
    assert!(emp <= cert, "{emp} > {cert}");
    for f in &m.files {
        let bytes = fs::read(dir.path().join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256);
        assert_eq!(bytes.len() as u64, f.bytes);
    }
    assert!(dir.path().join("width_eps0.1.csv").exists());
    assert!(dir.path().join("certificate_eps0.25.json").exists());

    // Same inputs, byte-identical artifacts.
    let again = TempDir::new().unwrap();
    let m2 = width_report_1d(again.path());
    assert_eq!(m.files, m2.files);

    // Report through the binary: passes, then fails once an artifact is edited.
    let out = bin().arg("report").arg(dir.path()).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("FRONT: certified L="), "{text}");
    fs::write(dir.path().join("width_eps0.1.csv"), "tampered\n").unwrap();
    let out = bin().arg("report").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("integrity"));
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = bin().args(["report"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["simulate", "--dx", "-1", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dx"));

    let target = dir.path().join("c");
    let out = bin()
        .args(["classify", "--measure"])
        .arg(measure("front_2d.json"))
        .arg("--out")
        .arg(&target)
        .env("FRONTLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m = Manifest::load(&target).unwrap();
    assert_eq!(m.threads, 1);
    assert!(target.join(MANIFEST).exists());
}

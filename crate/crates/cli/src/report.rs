use std::fmt::Write as _;
use std::path::Path;

use crate::manifest::{Manifest, Summary};
use crate::CliError;

pub struct Report {
    pub text: String,
    pub passed: bool,
}

fn verdict_line(s: &Summary, passed: bool) -> Option<String> {
    let status = if passed { "PASS" } else { "FAIL" };
    let num = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    let verdict = s.verdict.as_deref()?;
    if s.certified_l.is_none() && s.empirical_max_l.is_none() && s.l_growth.is_empty() {
        return Some(format!("verdict: {verdict}"));
    }
    let line = match verdict {
        "H1_FrontAndBounded" => format!(
            "FRONT: certified L={}, empirical max L={}, {status}",
            num(s.certified_l),
            num(s.empirical_max_l)
        ),
        "H3_BoundedNotFront" => format!(
            "BOUNDED, NOT A FRONT: certified L={}, empirical max L={}, max L'={}, {status}",
            num(s.certified_l),
            num(s.empirical_max_l),
            num(s.empirical_max_l_prime)
        ),
        "H2_Neither" => match s.l_growth.as_slice() {
            [(_, a), (_, b), (_, c)] => {
                let grows = a < b && b < c;
                format!(
                    "NEITHER: width {}; L(10)={a:.4}, L(20)={b:.4}, L(40)={c:.4}, {status}",
                    if grows { "grows" } else { "does not grow" }
                )
            }
            _ => format!("NEITHER: no certified width, {status}"),
        },
        other => format!("{other}: no certified width, {status}"),
    };
    Some(line)
}

/// Human-readable summary of an artifact directory. `passed` is false when a
/// recorded check failed or an artifact no longer matches its hash.
pub fn report(dir: &Path) -> Result<Report, CliError> {
    let m = Manifest::load(dir)?;
    let altered = m.altered_files(dir);
    let passed = m.passed() && altered.is_empty();
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{} {} ({} files, {:.1} s)",
        m.tool,
        m.command,
        m.files.len(),
        m.wall_clock_seconds
    );
    if let Some(line) = verdict_line(&m.summary, passed) {
        let _ = writeln!(t, "{line}");
    }
    if let (Some(lo), Some(hi)) = (m.summary.sandwich_lower, m.summary.sandwich_upper) {
        let _ = writeln!(
            t,
            "sandwich: max (h(v)-u)+ = {lo:.3e}, max (u-min(v,1))+ = {hi:.3e}"
        );
    }
    if let Some(inc) = m.summary.min_increment {
        let _ = writeln!(t, "monotonicity: min increment {inc:.3e}");
    }
    for c in &m.checks {
        let _ = writeln!(
            t,
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if !altered.is_empty() {
        let _ = writeln!(
            t,
            "[FAIL] integrity: {} altered or missing",
            altered.join(", ")
        );
    }
    let _ = writeln!(
        t,
        "{}",
        if passed {
            "all checks passed"
        } else {
            "some checks failed"
        }
    );
    Ok(Report { text: t, passed })
}

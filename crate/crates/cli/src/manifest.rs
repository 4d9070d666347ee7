use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the artifact directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Headline numbers for `report`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub verdict: Option<String>,
    pub epsilon: Option<f64>,
    pub certified_l: Option<f64>,
    pub empirical_max_l: Option<f64>,
    pub empirical_max_l_prime: Option<f64>,
    /// `(t, L)` at the times used for the growth comparison.
    pub l_growth: Vec<(f64, f64)>,
    pub sandwich_lower: Option<f64>,
    pub sandwich_upper: Option<f64>,
    pub min_increment: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub config_sha256: String,
    pub measure_sha256: Option<String>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let missing = || CliError::MissingManifest(dir.to_path_buf());
        let text = fs::read_to_string(dir.join(MANIFEST)).map_err(|_| missing())?;
        serde_json::from_str(&text).map_err(|_| missing())
    }

    /// Files whose content no longer matches the recorded hash.
    pub fn altered_files(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| {
                fs::read(dir.join(&f.path))
                    .map(|b| sha256_hex(&b) != f.sha256)
                    .unwrap_or(true)
            })
            .map(|f| f.path.clone())
            .collect()
    }
}

/// Serialised writes into one artifact directory, remembering every file.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.record(rel, bytes);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Registers a file some other writer already produced.
    pub fn adopt(&mut self, rel: &str) -> Result<(), CliError> {
        let bytes = fs::read(self.dir.join(rel))?;
        self.record(rel, &bytes);
        Ok(())
    }

    fn record(&mut self, rel: &str, bytes: &[u8]) {
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }
}

//! Output documents and atomic file writes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const VERSION: &str = env!("CAMNET_VERSION");

/// Writes `bytes` to `dir/name` via a temporary file and a rename, so readers
/// never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, &path) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, doc: &T) -> io::Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(doc).map_err(io::Error::other)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

#[derive(Debug, Serialize)]
pub struct RunSummaryDoc<'a> {
    pub version: &'static str,
    pub scenario: &'a str,
    pub scenario_hash: &'a str,
    pub controller: &'a str,
    pub seed: u64,
    pub num_targets: usize,
    pub tau: usize,
    pub percent_obs: f64,
    pub per_step_obs: &'a [usize],
    pub belief_conflicts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SeedScore {
    pub seed: u64,
    pub percent_obs: f64,
}

#[derive(Debug, Serialize)]
pub struct AggregateDoc<'a> {
    pub version: &'static str,
    pub scenario: &'a str,
    pub scenario_hash: &'a str,
    pub controller: &'a str,
    pub num_targets: usize,
    pub tau: usize,
    pub seeds: Vec<u64>,
    pub percent_obs: camnet::metrics::Aggregate,
    pub per_seed: Vec<SeedScore>,
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub controller: String,
    pub num_targets: usize,
    pub percent_obs: camnet::metrics::Aggregate,
    pub per_seed: Vec<SeedScore>,
}

#[derive(Debug, Serialize)]
pub struct CompareDoc<'a> {
    pub version: &'static str,
    pub scenario: &'a str,
    pub scenario_hash: &'a str,
    pub tau: usize,
    pub seeds: Vec<u64>,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Serialize)]
pub struct BenchDoc<'a> {
    pub version: &'static str,
    pub scenario: &'a str,
    pub scenario_hash: &'a str,
    pub seed: u64,
    pub mode: &'static str,
    pub repeats: usize,
    pub report: &'a camnet::metrics::ScalingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_40_over_10: Option<f64>,
}

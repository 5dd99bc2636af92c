//! Run artifacts: per-trajectory trace CSVs, the batch-average CSV, and the
//! plain-text `key = value` manifest that makes a finished run re-runnable
//! (a manifest parses as a config file).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Result, SimError};
use crate::trajectory::{BatchResult, CaptureStats, ProtocolConfig, TrajectoryTrace};

pub const TRACE_HEADER: &str =
    "photon_index,detector,entropy_bits,variance_jz_sum,overlap_psi0,mean_jx_diff,mean_jy_diff,mean_jz_sum";
pub const AVERAGE_HEADER: &str =
    "photon_index,entropy_bits,variance_jz_sum,overlap_psi0,mean_jx_diff,mean_jy_diff,mean_jz_sum";

/// 16 significant digits — enough to reproduce every f64 we write.
fn fmt_float(x: f64) -> String {
    format!("{x:.15e}")
}

fn fmt_overlap(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Conventional name of trajectory `t`'s trace file inside a run directory.
pub fn trace_file_name(trajectory_id: usize) -> String {
    format!("traj_{trajectory_id:04}.csv")
}

pub fn unix_ms_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Write one trajectory's rows. On failure the partial file is removed so a
/// run directory never holds a silently truncated trace.
pub fn write_trace_csv(trace: &TrajectoryTrace, path: &Path) -> Result<()> {
    let mut text = String::with_capacity(64 + trace.rows.len() * 160);
    text.push_str(TRACE_HEADER);
    text.push('\n');
    for row in &trace.rows {
        let m = &row.metrics;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            row.photon_index,
            row.detector.symbol(),
            fmt_float(m.entropy_bits),
            fmt_float(m.variance_jz_sum),
            fmt_overlap(m.overlap_psi0),
            fmt_float(m.mean_jx_diff),
            fmt_float(m.mean_jy_diff),
            fmt_float(m.mean_jz_sum),
        );
    }
    write_file(path, &text)
}

/// Write the row-wise batch average.
pub fn write_average_csv(batch: &BatchResult, path: &Path) -> Result<()> {
    let mut text = String::with_capacity(64 + batch.average.len() * 140);
    text.push_str(AVERAGE_HEADER);
    text.push('\n');
    for row in &batch.average {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            row.photon_index,
            fmt_float(row.entropy_bits),
            fmt_float(row.variance_jz_sum),
            fmt_overlap(row.overlap_psi0),
            fmt_float(row.mean_jx_diff),
            fmt_float(row.mean_jy_diff),
            fmt_float(row.mean_jz_sum),
        );
    }
    write_file(path, &text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| {
        // Best effort: don't leave a truncated artifact behind.
        let _ = fs::remove_file(path);
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}

/// Everything needed to identify, audit and re-run a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: ProtocolConfig,
    pub artifact_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub trace_files: Vec<String>,
    pub average_file: String,
    pub capture: Option<CaptureStats>,
}

impl RunManifest {
    pub fn new(batch: &BatchResult, started_unix_ms: u64, finished_unix_ms: u64) -> Self {
        Self {
            config: batch.config.clone(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_ms,
            finished_unix_ms,
            trace_files: batch
                .traces
                .iter()
                .map(|t| trace_file_name(t.trajectory_id))
                .collect(),
            average_file: "average.csv".to_string(),
            capture: batch.capture,
        }
    }

    /// Flat `key = value` text. Config keys use the config-file vocabulary,
    /// so feeding a manifest back through `--config` reproduces the run.
    /// Floats go through `Display`, which round-trips f64 exactly.
    pub fn to_text(&self) -> String {
        let mut text = String::with_capacity(512 + 32 * self.trace_files.len());
        let c = &self.config;
        text.push_str("# simulation run manifest\n");
        let _ = writeln!(text, "artifact_version = {}", self.artifact_version);
        let _ = writeln!(text, "protocol = {}", c.protocol);
        let _ = writeln!(text, "atoms_per_sample_1 = {}", c.atoms_per_sample_1);
        let _ = writeln!(text, "atoms_per_sample_2 = {}", c.atoms_per_sample_2);
        let _ = writeln!(text, "chi_tau = {}", c.chi_tau);
        let _ = writeln!(text, "photons_phase1 = {}", c.photons_phase1);
        let _ = writeln!(text, "photons_phase2 = {}", c.photons_phase2);
        let _ = writeln!(text, "rotation_angle = {}", c.rotation_angle);
        let _ = writeln!(text, "seed = {}", c.seed);
        let _ = writeln!(text, "trajectories = {}", c.trajectories);
        let _ = writeln!(text, "record_stride = {}", c.record_stride);
        let _ = writeln!(text, "started_unix_ms = {}", self.started_unix_ms);
        let _ = writeln!(text, "finished_unix_ms = {}", self.finished_unix_ms);
        let _ = writeln!(text, "average_file = {}", self.average_file);
        if let Some(s) = &self.capture {
            let _ = writeln!(text, "capture_count = {}", s.captured);
            let _ = writeln!(text, "capture_total = {}", s.total);
            let _ = writeln!(text, "capture_fraction = {}", s.fraction);
            let _ = writeln!(text, "capture_ci_low = {}", s.ci_low);
            let _ = writeln!(text, "capture_ci_high = {}", s.ci_high);
        }
        for (t, name) in self.trace_files.iter().enumerate() {
            let _ = writeln!(text, "trace_file_{t} = {name}");
        }
        text
    }
}

/// Write `average.csv` and `manifest.txt` into `dir`.
pub fn write_batch_summary(batch: &BatchResult, manifest: &RunManifest, dir: &Path) -> Result<()> {
    write_average_csv(batch, &dir.join(&manifest.average_file))?;
    write_file(&dir.join("manifest.txt"), &manifest.to_text())
}

//! Command-line front end: flag parsing, config files, and the precedence
//! rule (built-in defaults, then `--config` file, then explicit flags).

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;

use crate::error::{Result, SimError};
use crate::trajectory::{Protocol, ProtocolConfig};

/// Simulate two collective atomic spins entangled by single-photon
/// interferometric detection.
#[derive(Debug, Parser)]
#[command(name = "spinpair", version, about)]
pub struct Cli {
    /// Protocol: a = detection only, b = detect/rotate ±90°/detect,
    /// c = opposite rotation before every click
    #[arg(long)]
    pub protocol: Option<String>,

    /// Atoms in sample 1 (sample 2 follows unless --atoms2 is given)
    #[arg(long)]
    pub atoms: Option<u32>,

    /// Atoms in sample 2
    #[arg(long)]
    pub atoms2: Option<u32>,

    /// Phase shift per photon per unit projection
    #[arg(long = "chi-tau")]
    pub chi_tau: Option<f64>,

    /// Photons detected in phase 1 (the only phase for protocols a and c)
    #[arg(long)]
    pub photons: Option<usize>,

    /// Photons detected in phase 2 (protocol b)
    #[arg(long)]
    pub photons2: Option<usize>,

    /// Rotation angle in radians (protocol b: once between phases,
    /// protocol c: before every click); defaults per protocol
    #[arg(long)]
    pub theta: Option<f64>,

    /// Number of trajectories in the batch
    #[arg(long)]
    pub trajectories: Option<usize>,

    /// Master seed; trajectory t runs on stream t of this seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Record observables every this many photons (the final photon is
    /// always recorded)
    #[arg(long)]
    pub stride: Option<usize>,

    /// Output directory; the run writes into <out>/<protocol>-seed<seed>/
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Config file of `key = value` lines; flags override it. A manifest
    /// from a previous run is accepted verbatim.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A validated run: what to simulate and where to put it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub config: ProtocolConfig,
    pub out_dir: PathBuf,
}

/// Config-file fields, all optional; anything absent falls back to the
/// flag or built-in default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub protocol: Option<Protocol>,
    pub atoms_per_sample_1: Option<u32>,
    pub atoms_per_sample_2: Option<u32>,
    pub chi_tau: Option<f64>,
    pub photons_phase1: Option<usize>,
    pub photons_phase2: Option<usize>,
    pub rotation_angle: Option<f64>,
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub record_stride: Option<usize>,
}

/// Manifest bookkeeping keys a config parse recognizes and skips, so a run
/// manifest is itself a valid config file.
const MANIFEST_METADATA_KEYS: &[&str] = &[
    "artifact_version",
    "started_unix_ms",
    "finished_unix_ms",
    "average_file",
    "capture_count",
    "capture_total",
    "capture_fraction",
    "capture_ci_low",
    "capture_ci_high",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| {
        SimError::InvalidArgument(format!("config key {key}: cannot parse {value:?}: {e}"))
    })
}

/// Parse `key = value` config text. Blank lines and `#` comments are
/// skipped; unknown keys are an error (naming the key), manifest metadata
/// keys are tolerated.
pub fn parse_config_text(text: &str) -> Result<PartialConfig> {
    let mut out = PartialConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SimError::InvalidArgument(format!(
                "config line {}: expected `key = value`, got {line:?}",
                n + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "protocol" => out.protocol = Some(Protocol::from_tag(value)?),
            "atoms_per_sample_1" => out.atoms_per_sample_1 = Some(parse_value(key, value)?),
            "atoms_per_sample_2" => out.atoms_per_sample_2 = Some(parse_value(key, value)?),
            "chi_tau" => out.chi_tau = Some(parse_value(key, value)?),
            "photons_phase1" => out.photons_phase1 = Some(parse_value(key, value)?),
            "photons_phase2" => out.photons_phase2 = Some(parse_value(key, value)?),
            "rotation_angle" => out.rotation_angle = Some(parse_value(key, value)?),
            "seed" => out.seed = Some(parse_value(key, value)?),
            "trajectories" => out.trajectories = Some(parse_value(key, value)?),
            "record_stride" => out.record_stride = Some(parse_value(key, value)?),
            _ if MANIFEST_METADATA_KEYS.contains(&key) || key.starts_with("trace_file_") => {}
            _ => {
                return Err(SimError::InvalidArgument(format!(
                    "unknown config key {key:?}"
                )))
            }
        }
    }
    Ok(out)
}

/// Resolve flags + optional config file into a validated run request.
pub fn build_request(cli: &Cli) -> Result<RunRequest> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| SimError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => PartialConfig::default(),
    };

    let protocol = match &cli.protocol {
        Some(tag) => Protocol::from_tag(tag)?,
        None => file.protocol.unwrap_or(Protocol::PureMeasurement),
    };
    let mut config = ProtocolConfig::defaults(protocol);

    let atoms_1 = cli.atoms.or(file.atoms_per_sample_1);
    if let Some(n) = atoms_1 {
        config.atoms_per_sample_1 = n;
    }
    // Sample 2 follows sample 1 unless pinned explicitly (flag or file).
    config.atoms_per_sample_2 = cli
        .atoms2
        .or(file.atoms_per_sample_2)
        .or(atoms_1)
        .unwrap_or(config.atoms_per_sample_2);

    if let Some(x) = cli.chi_tau.or(file.chi_tau) {
        config.chi_tau = x;
    }
    if let Some(n) = cli.photons.or(file.photons_phase1) {
        config.photons_phase1 = n;
    }
    if let Some(n) = cli.photons2.or(file.photons_phase2) {
        config.photons_phase2 = n;
    }
    if let Some(x) = cli.theta.or(file.rotation_angle) {
        config.rotation_angle = x;
    }
    if let Some(s) = cli.seed.or(file.seed) {
        config.seed = s;
    }
    if let Some(n) = cli.trajectories.or(file.trajectories) {
        config.trajectories = n;
    }
    if let Some(n) = cli.stride.or(file.record_stride) {
        config.record_stride = n;
    }

    config.validate()?;
    Ok(RunRequest {
        config,
        out_dir: cli.out.clone().unwrap_or_else(|| PathBuf::from("runs")),
    })
}

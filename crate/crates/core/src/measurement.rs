//! Single-photon interferometric detection: which-port click statistics,
//! the measurement back-action on the joint spin state, and the analytic
//! predictor for where a long click record pins `J1z + J2z`.
//!
//! A probe photon picks up a phase shift set by the collective projection
//! `m12 = M1 + M2` before the output beam splitter, so the two detector
//! ports fire with `m12`-dependent probabilities and each click multiplies
//! every amplitude by an `m12`-diagonal factor. All quantities here depend
//! on the grid only through `m12`, i.e. through the anti-diagonals.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::spin::JointAmplitudes;

/// Output port that fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Plus,
    Minus,
}

impl Detector {
    /// Single-character form used in trace files.
    pub fn symbol(&self) -> char {
        match self {
            Detector::Plus => '+',
            Detector::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            '+' => Ok(Detector::Plus),
            '-' => Ok(Detector::Minus),
            other => Err(SimError::InvalidArgument(format!(
                "unknown detector symbol {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for Detector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One sampled detection event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickRecord {
    /// 1-based position of the photon in the trajectory.
    pub photon_index: usize,
    pub detector: Detector,
    /// Pre-click probability of the outcome that was realized.
    pub probability: f64,
    /// Per-photon phase-shift coupling the event was sampled at.
    pub chi_tau: f64,
}

/// Interferometer phase for an anti-diagonal: `(N_tot/2 - m12) * chi_tau`,
/// with `N_tot` the combined atom number. The click probabilities use half
/// this angle, the projection factors use all of it.
fn branch_phase(total_atoms: u32, m12: f64, chi_tau: f64) -> f64 {
    (f64::from(total_atoms) / 2.0 - m12) * chi_tau
}

/// `m12` value of anti-diagonal bucket `t = i + j`.
fn bucket_m12(state: &JointAmplitudes, t: usize) -> f64 {
    t as f64 - (state.basis_1().total_j() + state.basis_2().total_j())
}

fn bucket_count(state: &JointAmplitudes) -> usize {
    state.basis_1().dim() + state.basis_2().dim() - 1
}

/// Probabilities `(π+, π-)` for the next photon to exit at each port:
/// `π± = Σ |A|² · {cos², sin²}( (N_tot/2 - m12) χτ / 2 )`. They sum to one
/// for a normalized state; a state whose norm has drifted is rejected.
pub fn click_probabilities(state: &JointAmplitudes, chi_tau: f64) -> Result<(f64, f64)> {
    if !chi_tau.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "chi_tau must be finite, got {chi_tau}"
        )));
    }
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > 1e-6 {
        return Err(SimError::InvalidState(format!(
            "state squared norm is {norm_sq:.9}, expected 1 before detection"
        )));
    }
    let total_atoms = state.basis_1().atom_count() + state.basis_2().atom_count();
    // The phase only depends on the anti-diagonal, so build the trig tables
    // once per bucket instead of per cell.
    let tables: Vec<(f64, f64)> = (0..bucket_count(state))
        .map(|t| {
            let half = 0.5 * branch_phase(total_atoms, bucket_m12(state, t), chi_tau);
            (half.cos().powi(2), half.sin().powi(2))
        })
        .collect();
    let (mut pi_plus, mut pi_minus) = (0.0, 0.0);
    for j in 0..state.basis_2().dim() {
        for i in 0..state.basis_1().dim() {
            let w = state.amp(i, j).norm_sqr();
            let (c2, s2) = tables[i + j];
            pi_plus += w * c2;
            pi_minus += w * s2;
        }
    }
    Ok((pi_plus, pi_minus))
}

/// Amplitude factor a click at `detector` applies on the anti-diagonal
/// `m12`: `(1 ± e^{-i (N_tot/2 - m12) χτ}) / 2`. The two factors resolve the
/// identity, `|F+|² + |F-|² = 1`.
pub fn entangling_factor(m12: f64, total_atoms: u32, chi_tau: f64, detector: Detector) -> Complex64 {
    debug_assert!(m12.abs() <= f64::from(total_atoms) / 2.0 + 1e-9);
    let phase = Complex64::new(0.0, -branch_phase(total_atoms, m12, chi_tau)).exp();
    let one = Complex64::new(1.0, 0.0);
    match detector {
        Detector::Plus => (one + phase) * 0.5,
        Detector::Minus => (one - phase) * 0.5,
    }
}

/// Measurement back-action of one click: multiply every amplitude by the
/// detector's entangling factor for its anti-diagonal, then renormalize.
/// Before renormalization the squared norm equals the click probability of
/// that detector; if it is below 1e-15 the branch was (numerically)
/// impossible and the projection is refused rather than divided by zero.
pub fn project_on_click(
    state: &JointAmplitudes,
    detector: Detector,
    chi_tau: f64,
) -> Result<JointAmplitudes> {
    if !chi_tau.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "chi_tau must be finite, got {chi_tau}"
        )));
    }
    let total_atoms = state.basis_1().atom_count() + state.basis_2().atom_count();
    let factors: Vec<Complex64> = (0..bucket_count(state))
        .map(|t| entangling_factor(bucket_m12(state, t), total_atoms, chi_tau, detector))
        .collect();
    let mut amps = state.grid().clone();
    for j in 0..state.basis_2().dim() {
        for i in 0..state.basis_1().dim() {
            amps[(i, j)] *= factors[i + j];
        }
    }
    let branch_norm_sq = amps.norm_squared();
    if branch_norm_sq < 1e-15 {
        return Err(SimError::ImpossibleOutcome(format!(
            "detector '{}' branch has probability {branch_norm_sq:.3e}",
            detector.symbol()
        )));
    }
    amps.unscale_mut(branch_norm_sq.sqrt());
    Ok(JointAmplitudes::with_grid(
        state.basis_1(),
        state.basis_2(),
        amps,
    ))
}

/// Sample which detector fires for photon `photon_index`, apply the
/// corresponding back-action, and report the realized event. Exactly one
/// uniform draw is consumed per call — also when the click distribution is
/// degenerate — so click `k` of a trajectory always sits at the same
/// position of the random stream.
pub fn sample_click<R: Rng + ?Sized>(
    state: &JointAmplitudes,
    chi_tau: f64,
    photon_index: usize,
    rng: &mut R,
) -> Result<(ClickRecord, JointAmplitudes)> {
    let (pi_plus, pi_minus) = click_probabilities(state, chi_tau)?;
    let u: f64 = rng.random();
    let (detector, probability) = if u < pi_plus {
        (Detector::Plus, pi_plus)
    } else {
        (Detector::Minus, pi_minus)
    };
    let next = project_on_click(state, detector, chi_tau)?;
    Ok((
        ClickRecord {
            photon_index,
            detector,
            probability,
            chi_tau,
        },
        next,
    ))
}

/// Where a detection record `(n+, n-)` is expected to pin `m12 = M1 + M2`,
/// for two equal samples of `n_atoms_per_sample` atoms.
///
/// The record weights each anti-diagonal by the envelope
/// `cos^{2n+}(u) sin^{2n-}(u)` with `u = (N - m12) χτ / 2` (N = combined
/// atom number... here `2 * n_atoms_per_sample`); its maxima satisfy
/// `tan² u = n- / n+`. Because the envelope is periodic in `u` the record
/// is compatible with a comb of centers; all candidates inside the physical
/// range `[-N, N]` of `m12` are listed.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakPrediction {
    /// Candidate peak centers, ascending, all within `[-N_tot/ .., N_tot/..]`
    /// — i.e. inside `[-(N1+N2)/2, (N1+N2)/2]` in `m12` units.
    pub centers: Vec<f64>,
    /// Root-mean-square width of each peak: `1 / (χτ sqrt(n_total))`.
    pub width_rms: f64,
    pub n_plus: usize,
    pub n_total: usize,
}

/// Tangent-rule peak predictor for an equal pair of samples.
pub fn predict_peak(
    n_atoms_per_sample: u32,
    chi_tau: f64,
    n_plus: usize,
    n_total: usize,
) -> Result<PeakPrediction> {
    if n_atoms_per_sample == 0 {
        return Err(SimError::InvalidArgument(
            "n_atoms_per_sample must be at least 1".into(),
        ));
    }
    if !chi_tau.is_finite() || chi_tau == 0.0 {
        return Err(SimError::InvalidArgument(format!(
            "chi_tau must be finite and nonzero, got {chi_tau}"
        )));
    }
    if n_total == 0 || n_plus > n_total {
        return Err(SimError::InvalidArgument(format!(
            "need 0 < n_total and n_plus <= n_total, got n_plus={n_plus}, n_total={n_total}"
        )));
    }
    let n = f64::from(n_atoms_per_sample); // m12 ranges over [-n, n] for equal samples
    let n_minus = n_total - n_plus;

    // Envelope maxima in u. Pure records degenerate to the lattice points
    // where one factor is exactly 1.
    let u0 = if n_plus == 0 {
        std::f64::consts::FRAC_PI_2
    } else if n_minus == 0 {
        0.0
    } else {
        (n_minus as f64 / n_plus as f64).sqrt().atan()
    };

    // m12 = n - 2u/χτ must land in [-n, n] ⇒ u ∈ [0, n χτ] (orientation
    // depends on the sign of χτ). Collect every branch ±u0 + kπ in range.
    let u_bounds = (0.0_f64.min(n * chi_tau), 0.0_f64.max(n * chi_tau));
    let mut centers = Vec::new();
    for &base in &[u0, -u0] {
        let k_lo = ((u_bounds.0 - base) / std::f64::consts::PI).floor() as i64 - 1;
        let k_hi = ((u_bounds.1 - base) / std::f64::consts::PI).ceil() as i64 + 1;
        for k in k_lo..=k_hi {
            let u = base + k as f64 * std::f64::consts::PI;
            let center = n - 2.0 * u / chi_tau;
            if center >= -n - 1e-9 && center <= n + 1e-9 {
                centers.push(center.clamp(-n, n));
            }
        }
    }
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    centers.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    Ok(PeakPrediction {
        centers,
        width_rms: 1.0 / (chi_tau.abs() * (n_total as f64).sqrt()),
        n_plus,
        n_total,
    })
}

//! Observables recorded along a trajectory: entanglement entropy between
//! the two samples, the collective `J1z + J2z` variance the detection
//! squeezes, the overlap with the maximally entangled target state, and the
//! spin mean values.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::spin::{JointAmplitudes, SpinBasis};

/// Eigenvalues at or below this are treated as exact zeros in the entropy
/// sum (0·log 0 = 0); round-off routinely produces residuals of this size.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Which sample to trace out the other for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    One,
    Two,
}

/// All per-row trace observables in one bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSample {
    /// Entanglement entropy between the samples, in bits.
    pub entropy_bits: f64,
    /// Variance of `J1z + J2z`.
    pub variance_jz_sum: f64,
    /// Overlap with the maximally entangled state; `None` when the samples
    /// differ in size and the target state is undefined.
    pub overlap_psi0: Option<f64>,
    pub mean_jx_diff: f64,
    pub mean_jy_diff: f64,
    pub mean_jz_sum: f64,
}

impl MetricsSample {
    pub fn from_state(state: &JointAmplitudes) -> Self {
        let spins = state.spin_expectations();
        Self {
            entropy_bits: entanglement_entropy(state),
            variance_jz_sum: variance_jz_sum(state),
            overlap_psi0: overlap_psi0(state).ok(),
            mean_jx_diff: spins.jx_diff,
            mean_jy_diff: spins.jy_diff,
            mean_jz_sum: spins.jz_sum,
        }
    }
}

/// Reduced density matrix of one sample: `ρ1 = A A†`, `ρ2 = (A† A)^T`
/// (the transpose puts the row index back on the unprimed projection).
pub fn reduced_density_matrix(state: &JointAmplitudes, which: Sample) -> DMatrix<Complex64> {
    let a = state.grid();
    match which {
        Sample::One => a * a.adjoint(),
        Sample::Two => (a.adjoint() * a).transpose(),
    }
}

/// Von Neumann entropy of a density matrix, in bits. The matrix is
/// symmetrized against round-off before the eigensolve and eigenvalues
/// below [`EIGENVALUE_FLOOR`] contribute nothing.
pub fn density_entropy_bits(rho: &DMatrix<Complex64>) -> f64 {
    let herm = (rho + rho.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(herm);
    let mut entropy = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda > EIGENVALUE_FLOOR {
            entropy -= lambda * lambda.log2();
        }
    }
    // A pure reduced state can land at -0.0 or a few ulps below zero.
    entropy.max(0.0)
}

/// Entanglement entropy between the two samples in bits — the entropy of
/// either reduced density matrix (they share their nonzero spectrum).
pub fn entanglement_entropy(state: &JointAmplitudes) -> f64 {
    // Diagonalize the smaller side.
    let which = if state.basis_1().dim() <= state.basis_2().dim() {
        Sample::One
    } else {
        Sample::Two
    };
    density_entropy_bits(&reduced_density_matrix(state, which))
}

/// Variance of the pinned observable `J1z + J2z`; both moments are diagonal
/// in the grid so no operator is ever materialized.
pub fn variance_jz_sum(state: &JointAmplitudes) -> f64 {
    let (mut mean, mut second) = (0.0, 0.0);
    for j in 0..state.basis_2().dim() {
        let m2 = state.basis_2().m_value(j);
        for i in 0..state.basis_1().dim() {
            let m12 = state.basis_1().m_value(i) + m2;
            let w = state.amp(i, j).norm_sqr();
            mean += w * m12;
            second += w * m12 * m12;
        }
    }
    (second - mean * mean).max(0.0)
}

/// The maximally entangled target: equal superposition of all `|M, -M⟩`
/// product states, `(N+1)^{-1/2} Σ_M |M⟩|−M⟩` — the anti-diagonal of the
/// grid. It is a simultaneous null eigenstate of `J1z + J2z` and of every
/// other collective difference the protocols rotate into view, which is why
/// detection can only leave it or keep it.
pub fn psi0_state(basis: SpinBasis) -> JointAmplitudes {
    let dim = basis.dim();
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let amps = DMatrix::from_fn(dim, dim, |i, j| if i + j == dim - 1 { amp } else { zero });
    JointAmplitudes::with_grid(basis, basis, amps)
}

/// Squared overlap `|⟨Ψ0|ψ⟩|²` with the maximally entangled state. Defined
/// only for equal sample sizes.
pub fn overlap_psi0(state: &JointAmplitudes) -> Result<f64> {
    if state.basis_1() != state.basis_2() {
        return Err(SimError::UnsupportedConfiguration(format!(
            "maximally entangled overlap needs equal samples, got {} and {} atoms",
            state.basis_1().atom_count(),
            state.basis_2().atom_count()
        )));
    }
    let dim = state.basis_1().dim();
    let mut inner = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        inner += state.amp(i, dim - 1 - i);
    }
    Ok((inner.norm_sqr() / dim as f64).min(1.0))
}

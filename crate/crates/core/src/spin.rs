//! Collective spin representation: Dicke-basis bookkeeping for each atomic
//! sample, the joint amplitude grid over the product basis, ladder-operator
//! algebra and collective rotations about the x axis.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, SimError};

/// Tolerance on the squared norm of a grid accepted by [`JointAmplitudes::from_grid`].
pub const NORM_TOL: f64 = 1e-6;

/// One sample of `N` two-level atoms, restricted to the fully symmetric
/// subspace: total spin `J = N/2`, projections `M = -J ..= J`, dimension
/// `N + 1`. The struct only carries the atom count; operators acting on the
/// sample are derived (and cached) per count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinBasis {
    atom_count: u32,
}

impl SpinBasis {
    /// A basis needs at least one atom.
    pub fn new(atom_count: u32) -> Result<Self> {
        if atom_count == 0 {
            return Err(SimError::InvalidArgument(
                "atom_count must be at least 1".into(),
            ));
        }
        Ok(Self { atom_count })
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    /// Total angular momentum `J = N/2`.
    pub fn total_j(&self) -> f64 {
        f64::from(self.atom_count) / 2.0
    }

    /// Hilbert-space dimension `2J + 1 = N + 1`.
    pub fn dim(&self) -> usize {
        self.atom_count as usize + 1
    }

    /// Projection quantum number at grid index `i`: `M = i - J`, so index 0
    /// is `-J` and the last index is `+J`.
    pub fn m_value(&self, index: usize) -> f64 {
        index as f64 - self.total_j()
    }

    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m_value(i)).collect()
    }
}

/// Which neighbour a ladder operator connects to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderDirection {
    Raise,
    Lower,
}

/// Matrix element `sqrt(J(J+1) - M M')` of `J±` between `|J,M⟩` and
/// `|J,M±1⟩`. Stepping past the top or bottom of the ladder gives 0;
/// an `M` outside `[-J, J]` is an error.
pub fn ladder_coefficient(j: f64, m: f64, direction: LadderDirection) -> Result<f64> {
    if !j.is_finite() || j < 0.0 || !m.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "ladder coefficient needs finite j >= 0 and finite m, got j={j}, m={m}"
        )));
    }
    if m.abs() > j + 1e-9 {
        return Err(SimError::InvalidArgument(format!(
            "projection m={m} lies outside [-j, j] for j={j}"
        )));
    }
    let target = match direction {
        LadderDirection::Raise => m + 1.0,
        LadderDirection::Lower => m - 1.0,
    };
    if target.abs() > j + 1e-9 {
        return Ok(0.0);
    }
    // Guard against -0.0-scale round-off at the ladder ends.
    Ok((j * (j + 1.0) - m * target).max(0.0).sqrt())
}

/// Mean values of the collective components singled out by the protocols:
/// the differences `⟨J1x - J2x⟩`, `⟨J1y - J2y⟩` and the sum `⟨J1z + J2z⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinExpectations {
    pub jx_diff: f64,
    pub jy_diff: f64,
    pub jz_sum: f64,
}

/// Pure state of the two samples as a dense amplitude grid over the product
/// Dicke basis: rows index `M1`, columns index `M2` (both running upward
/// from `-J`). Kept normalized by every constructor and operation except
/// [`JointAmplitudes::from_grid_unnormalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointAmplitudes {
    basis_1: SpinBasis,
    basis_2: SpinBasis,
    amps: DMatrix<Complex64>,
}

impl JointAmplitudes {
    /// Product of per-sample binomial superpositions — every atom in the
    /// balanced single-atom superposition, i.e. both collective spins
    /// pointing along +x. Amplitudes are real, positive and normalized:
    /// `A_M = 2^{-J} sqrt( (2J)! / ((J+M)!(J-M)!) )` per sample.
    pub fn binomial(basis_1: SpinBasis, basis_2: SpinBasis) -> Self {
        let a1 = binomial_amplitudes(basis_1);
        let a2 = binomial_amplitudes(basis_2);
        let amps = DMatrix::from_fn(basis_1.dim(), basis_2.dim(), |i, j| {
            Complex64::new(a1[i] * a2[j], 0.0)
        });
        let mut state = Self {
            basis_1,
            basis_2,
            amps,
        };
        state.renormalize();
        state
    }

    /// Wrap an explicit grid, requiring shape `(N1+1) x (N2+1)` and squared
    /// norm within [`NORM_TOL`] of one; the residual is then renormalized
    /// away exactly.
    pub fn from_grid(
        basis_1: SpinBasis,
        basis_2: SpinBasis,
        amps: DMatrix<Complex64>,
    ) -> Result<Self> {
        check_shape(basis_1, basis_2, &amps)?;
        let norm_sq = amps.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(SimError::InvalidState(format!(
                "amplitude grid has squared norm {norm_sq:.12}, expected 1"
            )));
        }
        let mut state = Self {
            basis_1,
            basis_2,
            amps,
        };
        state.renormalize();
        Ok(state)
    }

    /// Wrap a grid without the norm check (shape is still enforced). For
    /// tests and callers that normalize themselves; downstream operations
    /// that require normalization will reject states built from garbage.
    pub fn from_grid_unnormalized(
        basis_1: SpinBasis,
        basis_2: SpinBasis,
        amps: DMatrix<Complex64>,
    ) -> Result<Self> {
        check_shape(basis_1, basis_2, &amps)?;
        Ok(Self {
            basis_1,
            basis_2,
            amps,
        })
    }

    pub(crate) fn with_grid(
        basis_1: SpinBasis,
        basis_2: SpinBasis,
        amps: DMatrix<Complex64>,
    ) -> Self {
        debug_assert_eq!((amps.nrows(), amps.ncols()), (basis_1.dim(), basis_2.dim()));
        Self {
            basis_1,
            basis_2,
            amps,
        }
    }

    pub fn basis_1(&self) -> SpinBasis {
        self.basis_1
    }

    pub fn basis_2(&self) -> SpinBasis {
        self.basis_2
    }

    pub fn grid(&self) -> &DMatrix<Complex64> {
        &self.amps
    }

    /// Amplitude on `|M1 = i - J1⟩ ⊗ |M2 = j - J2⟩`.
    pub fn amp(&self, i: usize, j: usize) -> Complex64 {
        self.amps[(i, j)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.amps.norm_squared().sqrt();
        if norm > 0.0 {
            self.amps.unscale_mut(norm);
        }
    }

    /// `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`, clamped to `[0, 1]` against round-off.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr().min(1.0)
    }

    /// Rotate the two samples about x by opposite angles: sample 1 by
    /// `angle`, sample 2 by `-angle`. Builds the two rotation matrices on
    /// the fly; hot loops should build them once and use
    /// [`JointAmplitudes::apply_rotations`].
    pub fn rotate_opposite(&self, angle: f64) -> Result<Self> {
        let d1 = rotation_matrix(self.basis_1, angle)?;
        let d2 = rotation_matrix(self.basis_2, -angle)?;
        self.apply_rotations(&d1, &d2)
    }

    /// Apply prebuilt per-sample rotations: `A' = D1 · A · D2^T`. The
    /// transpose (not adjoint) on the second factor is what implements
    /// `(D1 ⊗ D2)|ψ⟩` on a grid whose columns index sample 2.
    pub fn apply_rotations(&self, d1: &RotationMatrix, d2: &RotationMatrix) -> Result<Self> {
        if d1.basis() != self.basis_1 || d2.basis() != self.basis_2 {
            return Err(SimError::InvalidState(
                "rotation matrices do not match the state bases".into(),
            ));
        }
        let amps = d1.matrix() * &self.amps * d2.matrix().transpose();
        Ok(Self {
            basis_1: self.basis_1,
            basis_2: self.basis_2,
            amps,
        })
    }

    /// Mean values `⟨J1x - J2x⟩`, `⟨J1y - J2y⟩`, `⟨J1z + J2z⟩`. The
    /// imaginary parts vanish for Hermitian operators and are discarded.
    pub fn spin_expectations(&self) -> SpinExpectations {
        let ops1 = basis_ops(self.basis_1);
        let ops2 = basis_ops(self.basis_2);
        let jx1 = self.expect_sample_1(&ops1.jx_complex);
        let jx2 = self.expect_sample_2(&ops2.jx_complex);
        let jy1 = self.expect_sample_1(&ops1.jy);
        let jy2 = self.expect_sample_2(&ops2.jy);

        let mut jz_sum = 0.0;
        for j in 0..self.basis_2.dim() {
            let m2 = self.basis_2.m_value(j);
            for i in 0..self.basis_1.dim() {
                let m1 = self.basis_1.m_value(i);
                jz_sum += self.amps[(i, j)].norm_sqr() * (m1 + m2);
            }
        }

        SpinExpectations {
            jx_diff: jx1 - jx2,
            jy_diff: jy1 - jy2,
            jz_sum,
        }
    }

    /// `⟨O ⊗ 1⟩ = Re Σ conj(A) ∘ (O A)`.
    fn expect_sample_1(&self, op: &DMatrix<Complex64>) -> f64 {
        self.amps.dotc(&(op * &self.amps)).re
    }

    /// `⟨1 ⊗ O⟩ = Re Σ conj(A) ∘ (A O^T)`.
    fn expect_sample_2(&self, op: &DMatrix<Complex64>) -> f64 {
        self.amps.dotc(&(&self.amps * op.transpose())).re
    }
}

fn check_shape(basis_1: SpinBasis, basis_2: SpinBasis, amps: &DMatrix<Complex64>) -> Result<()> {
    if amps.nrows() != basis_1.dim() || amps.ncols() != basis_2.dim() {
        return Err(SimError::InvalidArgument(format!(
            "grid shape {}x{} does not match bases {}x{}",
            amps.nrows(),
            amps.ncols(),
            basis_1.dim(),
            basis_2.dim()
        )));
    }
    Ok(())
}

/// Binomial single-sample amplitudes via log-gamma, stable up to thousands
/// of atoms where raw factorials would overflow.
fn binomial_amplitudes(basis: SpinBasis) -> Vec<f64> {
    let n = f64::from(basis.atom_count());
    let j = basis.total_j();
    (0..basis.dim())
        .map(|i| {
            let k = i as f64; // k = J + M atoms raised
            (0.5 * (ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)) - j * LN_2)
                .exp()
        })
        .collect()
}

/// Collective rotation `exp(-i angle Jx)` for one sample, stored dense.
#[derive(Debug, Clone)]
pub struct RotationMatrix {
    basis: SpinBasis,
    angle: f64,
    matrix: DMatrix<Complex64>,
}

impl RotationMatrix {
    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// Build `exp(-i angle Jx)` from the cached eigendecomposition of `Jx`:
/// `D = V exp(-i angle Λ) V^T` with `V` real orthogonal, so `D` is complex
/// symmetric as well as unitary.
pub fn rotation_matrix(basis: SpinBasis, angle: f64) -> Result<RotationMatrix> {
    if !angle.is_finite() {
        return Err(SimError::InvalidArgument(format!(
            "rotation angle must be finite, got {angle}"
        )));
    }
    let ops = basis_ops(basis);
    let dim = basis.dim();
    let phases = DVector::from_iterator(
        dim,
        ops.jx_eigenvalues
            .iter()
            .map(|&lambda| Complex64::new(0.0, -angle * lambda).exp()),
    );
    let vectors = ops.jx_eigenvectors.map(|x| Complex64::new(x, 0.0));
    let matrix = &vectors * DMatrix::from_diagonal(&phases) * vectors.transpose();
    Ok(RotationMatrix {
        basis,
        angle,
        matrix,
    })
}

/// Dense `Jx` for one sample (tridiagonal, real symmetric).
pub fn jx_matrix(basis: SpinBasis) -> DMatrix<f64> {
    basis_ops(basis).jx.clone()
}

/// Dense `Jy` for one sample (tridiagonal, Hermitian, purely imaginary).
pub fn jy_matrix(basis: SpinBasis) -> DMatrix<Complex64> {
    basis_ops(basis).jy.clone()
}

/// Per-sample operator data, built once per atom count and shared. The
/// eigendecomposition of `Jx` is the expensive part and is what rotation
/// matrices for every angle are assembled from.
struct BasisOps {
    jx: DMatrix<f64>,
    jx_complex: DMatrix<Complex64>,
    jy: DMatrix<Complex64>,
    jx_eigenvalues: DVector<f64>,
    jx_eigenvectors: DMatrix<f64>,
}

impl BasisOps {
    fn build(basis: SpinBasis) -> Self {
        let dim = basis.dim();
        let j = basis.total_j();
        let mut jx = DMatrix::zeros(dim, dim);
        let mut jy = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for i in 0..dim - 1 {
            let m = basis.m_value(i);
            // ⟨M+1|J+|M⟩; J- supplies the mirrored element.
            let c = (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
            jx[(i + 1, i)] = 0.5 * c;
            jx[(i, i + 1)] = 0.5 * c;
            jy[(i + 1, i)] = Complex64::new(0.0, -0.5 * c);
            jy[(i, i + 1)] = Complex64::new(0.0, 0.5 * c);
        }
        let eig = SymmetricEigen::new(jx.clone());
        let jx_complex = jx.map(|x| Complex64::new(x, 0.0));
        Self {
            jx,
            jx_complex,
            jy,
            jx_eigenvalues: eig.eigenvalues,
            jx_eigenvectors: eig.eigenvectors,
        }
    }
}

fn basis_ops(basis: SpinBasis) -> Arc<BasisOps> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<BasisOps>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(ops) = cache.lock().unwrap().get(&basis.atom_count()) {
        return Arc::clone(ops);
    }
    // Built outside the lock; a racing builder just produces the same data.
    let ops = Arc::new(BasisOps::build(basis));
    Arc::clone(
        cache
            .lock()
            .unwrap()
            .entry(basis.atom_count())
            .or_insert(ops),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn basis(n: u32) -> SpinBasis {
        SpinBasis::new(n).unwrap()
    }

    /// Exact binomial amplitude from integer factorials — independent of the
    /// log-gamma route used by the implementation. Fine up to N = 20 in u128.
    fn exact_binomial_amp(n: u64, k: u64) -> f64 {
        let fact = |x: u64| -> u128 { (1..=x as u128).product::<u128>().max(1) };
        let choose = fact(n) / (fact(k) * fact(n - k));
        (choose as f64).sqrt() / 2f64.powi(n as i32 / 2) / 2f64.powf(0.5 * (n % 2) as f64)
    }

    #[test]
    fn basis_bookkeeping() {
        let b = basis(20);
        assert_eq!(b.dim(), 21);
        assert_eq!(b.total_j(), 10.0);
        assert_eq!(b.m_value(0), -10.0);
        assert_eq!(b.m_value(20), 10.0);
        assert_eq!(b.m_values().len(), 21);
        // Odd atom number: half-integer spin.
        let b1 = basis(1);
        assert_eq!(b1.dim(), 2);
        assert_eq!(b1.total_j(), 0.5);
        assert_eq!(b1.m_value(0), -0.5);
        assert!(SpinBasis::new(0).is_err());
    }

    #[test]
    fn ladder_coefficients_match_closed_form() {
        // j=1: J+|1,-1⟩ = sqrt(2)|1,0⟩, J+|1,0⟩ = sqrt(2)|1,1⟩.
        let c = ladder_coefficient(1.0, -1.0, LadderDirection::Raise).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
        let c = ladder_coefficient(1.0, 0.0, LadderDirection::Raise).unwrap();
        assert!((c - 2f64.sqrt()).abs() < 1e-15);
        // Stepping off the top of the ladder annihilates.
        assert_eq!(
            ladder_coefficient(1.0, 1.0, LadderDirection::Raise).unwrap(),
            0.0
        );
        assert_eq!(
            ladder_coefficient(2.5, -2.5, LadderDirection::Lower).unwrap(),
            0.0
        );
        // Half-integer interior value: J-|3/2,1/2⟩ = 2|3/2,-1/2⟩.
        let c = ladder_coefficient(1.5, 0.5, LadderDirection::Lower).unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        assert!(ladder_coefficient(1.0, 2.0, LadderDirection::Raise).is_err());
        assert!(ladder_coefficient(-1.0, 0.0, LadderDirection::Raise).is_err());
    }

    #[test]
    fn binomial_state_matches_exact_factorials() {
        let b = basis(20);
        let state = JointAmplitudes::binomial(b, b);
        // Joint amplitude is the product of the two single-sample values.
        for i in 0..21 {
            for j in 0..21 {
                let expected = exact_binomial_amp(20, i as u64) * exact_binomial_amp(20, j as u64);
                let got = state.amp(i, j);
                assert!(
                    (got.re - expected).abs() < 1e-12 && got.im == 0.0,
                    "cell ({i},{j}): got {got}, expected {expected}"
                );
                assert!(got.re > 0.0);
            }
        }
        // Edge amplitudes are exactly 2^-J per sample: A(M=±J) = 1/1024.
        let corner = state.amp(0, 0).re;
        assert!((corner - 0.0009765625 * 0.0009765625).abs() < 1e-18);
        assert!((state.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_state_odd_atom_count() {
        let b = basis(3);
        let state = JointAmplitudes::binomial(b, b);
        // Single-sample amplitudes for N=3: sqrt(1,3,3,1)/sqrt(8).
        let expected = [1f64, 3., 3., 1.].map(|c| (c / 8.0).sqrt());
        for i in 0..4 {
            assert!((state.amp(i, 0).re - expected[i] * expected[0]).abs() < 1e-14);
        }
        assert!((state.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_grid_checks_shape_and_norm() {
        let b = basis(2);
        let ok = DMatrix::from_fn(3, 3, |i, j| {
            if i == 0 && j == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let state = JointAmplitudes::from_grid(b, b, ok.clone()).unwrap();
        assert!((state.norm_sq() - 1.0).abs() < 1e-15);

        let bad_shape = DMatrix::from_element(2, 3, Complex64::new(0.5, 0.0));
        assert!(matches!(
            JointAmplitudes::from_grid(b, b, bad_shape),
            Err(SimError::InvalidArgument(_))
        ));

        let bad_norm = ok.scale(0.5);
        assert!(matches!(
            JointAmplitudes::from_grid(b, b, bad_norm.clone()),
            Err(SimError::InvalidState(_))
        ));
        // The unnormalized constructor admits it; norm is preserved as given.
        let raw = JointAmplitudes::from_grid_unnormalized(b, b, bad_norm).unwrap();
        assert!((raw.norm_sq() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rotation_matrix_is_unitary_and_symmetric() {
        for &n in &[1u32, 2, 7, 20] {
            let b = basis(n);
            let d = rotation_matrix(b, 0.37).unwrap();
            let m = d.matrix();
            let identity = m * m.adjoint();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((identity[(i, j)].re - expected).abs() < 1e-12);
                    assert!(identity[(i, j)].im.abs() < 1e-12);
                    // Complex symmetry D = D^T (real eigenvectors).
                    let diff = m[(i, j)] - m[(j, i)];
                    assert!(diff.norm() < 1e-12);
                }
            }
        }
        assert!(rotation_matrix(basis(4), f64::NAN).is_err());
    }

    #[test]
    fn rotation_matches_spin_half_closed_form() {
        // For one atom exp(-i θ Jx) = [[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]].
        let b = basis(1);
        for &theta in &[0.0, 0.3, FRAC_PI_2, PI, -1.2] {
            let d = rotation_matrix(b, theta).unwrap();
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let expected = [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    assert!(
                        (d.matrix()[(i, j)] - expected[i][j]).norm() < 1e-14,
                        "theta={theta}, cell ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn rotation_composes_and_inverts() {
        let b = basis(8);
        let state = JointAmplitudes::binomial(b, b);
        let forth = state.rotate_opposite(0.7).unwrap();
        let back = forth.rotate_opposite(-0.7).unwrap();
        assert!(back.fidelity(&state) > 1.0 - 1e-12);
        // Two quarter turns equal a half turn.
        let two_quarters = state
            .rotate_opposite(FRAC_PI_2 / 2.0)
            .unwrap()
            .rotate_opposite(FRAC_PI_2 / 2.0)
            .unwrap();
        let half = state.rotate_opposite(FRAC_PI_2).unwrap();
        assert!(two_quarters.fidelity(&half) > 1.0 - 1e-12);
        // Norm preserved.
        assert!((forth.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_rejects_mismatched_bases() {
        let state = JointAmplitudes::binomial(basis(4), basis(4));
        let d_wrong = rotation_matrix(basis(6), 0.5).unwrap();
        let d_ok = rotation_matrix(basis(4), -0.5).unwrap();
        assert!(matches!(
            state.apply_rotations(&d_wrong, &d_ok),
            Err(SimError::InvalidState(_))
        ));
    }

    #[test]
    fn binomial_state_points_along_x() {
        // ⟨Jx⟩ = J for each sample in the binomial state, so the difference
        // vanishes and each piece is maximal; check via individual operators.
        let b = basis(10);
        let state = JointAmplitudes::binomial(b, b);
        let e = state.spin_expectations();
        assert!(e.jx_diff.abs() < 1e-10);
        assert!(e.jy_diff.abs() < 1e-10);
        assert!(e.jz_sum.abs() < 1e-10);
        let jx1 = state.amps.dotc(&(&basis_ops(b).jx_complex * &state.amps));
        assert!((jx1.re - 5.0).abs() < 1e-10, "⟨J1x⟩ = J = 5, got {jx1}");
        assert!(jx1.im.abs() < 1e-12);
        // Being the top Jx eigenstate, it is invariant (up to phase) under
        // x rotations.
        let rotated = state.rotate_opposite(1.1).unwrap();
        assert!(rotated.fidelity(&state) > 1.0 - 1e-12);
    }

    #[test]
    fn opposite_rotation_moves_samples_oppositely() {
        let b = basis(6);
        // All atoms raised: both spins point along +z.
        let dim = b.dim();
        let mut grid = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        grid[(dim - 1, dim - 1)] = Complex64::new(1.0, 0.0);
        let state = JointAmplitudes::from_grid(b, b, grid).unwrap();
        // Rotating a +z spin about x by ±π/2 lands it on ∓y: sample 1
        // (angle +π/2) acquires ⟨J1y⟩ = -J, sample 2 (angle -π/2) +J.
        let rotated = state.rotate_opposite(FRAC_PI_2).unwrap();
        let ops = basis_ops(b);
        let jy1 = rotated.amps.dotc(&(&ops.jy * &rotated.amps)).re;
        let jy2 = rotated
            .amps
            .dotc(&(&rotated.amps * ops.jy.transpose()))
            .re;
        assert!((jy1 + 3.0).abs() < 1e-10, "⟨J1y⟩ = -3, got {jy1}");
        assert!((jy2 - 3.0).abs() < 1e-10, "⟨J2y⟩ = +3, got {jy2}");
        let e = rotated.spin_expectations();
        assert!((e.jy_diff + 6.0).abs() < 1e-10);
        assert!(e.jz_sum.abs() < 1e-10);
    }

    #[test]
    fn casimir_expectation_is_invariant_under_rotations() {
        // Jx² + Jy² + Jz² = j(j+1)·I on the ladder, so the per-sample
        // expectation is j(j+1) for every state and every rotation angle.
        let b = basis(7);
        let j = b.total_j();
        let jx = jx_matrix(b).map(|x| Complex64::new(x, 0.0));
        let jy = jy_matrix(b);
        let jz = DMatrix::from_fn(b.dim(), b.dim(), |i, k| {
            Complex64::new(if i == k { b.m_value(i) } else { 0.0 }, 0.0)
        });
        let casimir = &jx * &jx + &jy * &jy + &jz * &jz;

        let mut state = JointAmplitudes::binomial(b, b);
        for angle in [0.0, 0.37, FRAC_PI_2, 2.6] {
            let expect_1 = state.amps.dotc(&(&casimir * &state.amps)).re;
            let expect_2 = state.amps.dotc(&(&state.amps * casimir.transpose())).re;
            assert!((expect_1 - j * (j + 1.0)).abs() < 1e-9);
            assert!((expect_2 - j * (j + 1.0)).abs() < 1e-9);
            state = state.rotate_opposite(angle).unwrap();
        }
    }

    #[test]
    fn jx_jy_matrices_are_hermitian() {
        let b = basis(5);
        let jx = jx_matrix(b);
        let jy = jy_matrix(b);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                assert_eq!(jx[(i, j)], jx[(j, i)]);
                assert!((jy[(i, j)] - jy[(j, i)].conj()).norm() < 1e-15);
            }
        }
        // Commutator sanity on one element: [Jx, Jy] = i Jz.
        let jxc = jx.map(|x| Complex64::new(x, 0.0));
        let comm = &jxc * &jy - &jy * &jxc;
        for i in 0..b.dim() {
            let expected = Complex64::new(0.0, b.m_value(i));
            assert!((comm[(i, i)] - expected).norm() < 1e-12);
        }
    }
}

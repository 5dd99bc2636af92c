//! Python bindings: the joint spin state, click sampling and the protocol
//! runners, close to the Rust API but with Python-friendly types.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spinpair::measurement::{self, Detector};
use spinpair::metrics;
use spinpair::spin::{JointAmplitudes, SpinBasis};
use spinpair::trajectory::{self, Protocol, ProtocolConfig, TrajectoryRng, TrajectoryTrace};
use spinpair::SimError;

fn to_py(err: SimError) -> PyErr {
    match err {
        SimError::InvalidArgument(_)
        | SimError::InvalidState(_)
        | SimError::UnsupportedConfiguration(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn parse_detector(symbol: &str) -> PyResult<Detector> {
    let mut chars = symbol.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Detector::from_symbol(c).map_err(to_py),
        _ => Err(PyValueError::new_err(format!(
            "detector must be '+' or '-', got {symbol:?}"
        ))),
    }
}

/// Joint pure state of the two samples on the product Dicke basis.
#[pyclass(module = "spinpair_py", skip_from_py_object)]
#[derive(Clone)]
struct State {
    inner: JointAmplitudes,
}

#[pymethods]
impl State {
    /// Product of per-sample binomial superpositions (both spins along +x).
    #[staticmethod]
    #[pyo3(signature = (atoms, atoms2=None))]
    fn binomial(atoms: u32, atoms2: Option<u32>) -> PyResult<Self> {
        let b1 = SpinBasis::new(atoms).map_err(to_py)?;
        let b2 = SpinBasis::new(atoms2.unwrap_or(atoms)).map_err(to_py)?;
        Ok(Self {
            inner: JointAmplitudes::binomial(b1, b2),
        })
    }

    /// The maximally entangled target state (equal samples only).
    #[staticmethod]
    fn maximally_entangled(atoms: u32) -> PyResult<Self> {
        let b = SpinBasis::new(atoms).map_err(to_py)?;
        Ok(Self {
            inner: metrics::psi0_state(b),
        })
    }

    /// Build from an explicit amplitude grid (list of rows); must be
    /// normalized to 1e-6 and shaped (atoms+1) x (atoms2+1).
    #[staticmethod]
    fn from_amplitudes(atoms: u32, atoms2: u32, grid: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let b1 = SpinBasis::new(atoms).map_err(to_py)?;
        let b2 = SpinBasis::new(atoms2).map_err(to_py)?;
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if rows != b1.dim() || cols != b2.dim() || grid.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err(format!(
                "grid must be {} x {}",
                b1.dim(),
                b2.dim()
            )));
        }
        let amps =
            nalgebra_grid(rows, cols, |i, j| grid[i][j]);
        let inner = JointAmplitudes::from_grid(b1, b2, amps).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn atoms(&self) -> (u32, u32) {
        (
            self.inner.basis_1().atom_count(),
            self.inner.basis_2().atom_count(),
        )
    }

    fn norm_sq(&self) -> f64 {
        self.inner.norm_sq()
    }

    fn amplitudes(&self) -> Vec<Vec<Complex64>> {
        let g = self.inner.grid();
        (0..g.nrows())
            .map(|i| (0..g.ncols()).map(|j| g[(i, j)]).collect())
            .collect()
    }

    fn fidelity(&self, other: &State) -> f64 {
        self.inner.fidelity(&other.inner)
    }

    fn entropy_bits(&self) -> f64 {
        metrics::entanglement_entropy(&self.inner)
    }

    fn variance_jz_sum(&self) -> f64 {
        metrics::variance_jz_sum(&self.inner)
    }

    fn overlap_psi0(&self) -> PyResult<f64> {
        metrics::overlap_psi0(&self.inner).map_err(to_py)
    }

    /// (⟨J1x - J2x⟩, ⟨J1y - J2y⟩, ⟨J1z + J2z⟩)
    fn spin_expectations(&self) -> (f64, f64, f64) {
        let e = self.inner.spin_expectations();
        (e.jx_diff, e.jy_diff, e.jz_sum)
    }

    /// (π+, π-) for the next probe photon.
    fn click_probabilities(&self, chi_tau: f64) -> PyResult<(f64, f64)> {
        measurement::click_probabilities(&self.inner, chi_tau).map_err(to_py)
    }

    /// Back-action of a click at detector '+' or '-'.
    fn project(&self, detector: &str, chi_tau: f64) -> PyResult<State> {
        let det = parse_detector(detector)?;
        measurement::project_on_click(&self.inner, det, chi_tau)
            .map(|inner| State { inner })
            .map_err(to_py)
    }

    /// Rotate sample 1 by `angle` about x and sample 2 by `-angle`.
    fn rotate_opposite(&self, angle: f64) -> PyResult<State> {
        self.inner
            .rotate_opposite(angle)
            .map(|inner| State { inner })
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let (n1, n2) = self.atoms();
        format!("State(atoms=({n1}, {n2}))")
    }
}

fn nalgebra_grid(
    rows: usize,
    cols: usize,
    f: impl Fn(usize, usize) -> Complex64,
) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(rows, cols, f)
}

/// Seeded click sampler: stream `stream` of master seed `seed`, the same
/// addressing the batch runner uses for trajectory indices.
#[pyclass(module = "spinpair_py")]
struct ClickSampler {
    rng: TrajectoryRng,
}

#[pymethods]
impl ClickSampler {
    #[new]
    #[pyo3(signature = (seed, stream=0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: trajectory::trajectory_rng(seed, stream as usize),
        }
    }

    /// Sample one click: returns (detector, probability, post-click state).
    fn sample_click(
        &mut self,
        state: &State,
        chi_tau: f64,
        photon_index: usize,
    ) -> PyResult<(String, f64, State)> {
        let (record, next) =
            measurement::sample_click(&state.inner, chi_tau, photon_index, &mut self.rng)
                .map_err(to_py)?;
        Ok((
            record.detector.symbol().to_string(),
            record.probability,
            State { inner: next },
        ))
    }
}

/// Batch/trajectory configuration mirroring the CLI parameters.
#[pyclass(module = "spinpair_py", skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: ProtocolConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (protocol="a", atoms=20, atoms2=None, chi_tau=0.24, photons=500,
                        photons2=500, theta=None, seed=0, trajectories=50, stride=1))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        protocol: &str,
        atoms: u32,
        atoms2: Option<u32>,
        chi_tau: f64,
        photons: usize,
        photons2: usize,
        theta: Option<f64>,
        seed: u64,
        trajectories: usize,
        stride: usize,
    ) -> PyResult<Self> {
        let protocol = Protocol::from_tag(protocol).map_err(to_py)?;
        let mut inner = ProtocolConfig::defaults(protocol);
        inner.atoms_per_sample_1 = atoms;
        inner.atoms_per_sample_2 = atoms2.unwrap_or(atoms);
        inner.chi_tau = chi_tau;
        inner.photons_phase1 = photons;
        inner.photons_phase2 = photons2;
        if let Some(t) = theta {
            inner.rotation_angle = t;
        }
        inner.seed = seed;
        inner.trajectories = trajectories;
        inner.record_stride = stride;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn protocol(&self) -> String {
        self.inner.protocol.tag().to_string()
    }

    #[getter]
    fn chi_tau(&self) -> f64 {
        self.inner.chi_tau
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn trajectories(&self) -> usize {
        self.inner.trajectories
    }

    #[getter]
    fn total_photons(&self) -> usize {
        self.inner.total_photons()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(protocol='{}', atoms=({}, {}), chi_tau={}, photons={}, seed={}, trajectories={})",
            self.inner.protocol,
            self.inner.atoms_per_sample_1,
            self.inner.atoms_per_sample_2,
            self.inner.chi_tau,
            self.inner.total_photons(),
            self.inner.seed,
            self.inner.trajectories
        )
    }
}

/// One simulated trajectory, rows exposed as parallel lists.
#[pyclass(module = "spinpair_py")]
struct Trace {
    inner: TrajectoryTrace,
}

#[pymethods]
impl Trace {
    #[getter]
    fn trajectory_id(&self) -> usize {
        self.inner.trajectory_id
    }

    #[getter]
    fn photon_indices(&self) -> Vec<usize> {
        self.inner.rows.iter().map(|r| r.photon_index).collect()
    }

    /// Click record at the recorded rows, as a '+'/'-' string.
    #[getter]
    fn detectors(&self) -> String {
        self.inner
            .rows
            .iter()
            .map(|r| r.detector.symbol())
            .collect()
    }

    #[getter]
    fn entropy_bits(&self) -> Vec<f64> {
        self.inner
            .rows
            .iter()
            .map(|r| r.metrics.entropy_bits)
            .collect()
    }

    #[getter]
    fn variance_jz_sum(&self) -> Vec<f64> {
        self.inner
            .rows
            .iter()
            .map(|r| r.metrics.variance_jz_sum)
            .collect()
    }

    #[getter]
    fn overlap_psi0(&self) -> Vec<Option<f64>> {
        self.inner
            .rows
            .iter()
            .map(|r| r.metrics.overlap_psi0)
            .collect()
    }

    #[getter]
    fn rotation_marks(&self) -> Vec<usize> {
        self.inner.rotation_marks.clone()
    }

    #[getter]
    fn final_entropy_bits(&self) -> f64 {
        self.inner.final_summary.entropy_bits
    }

    #[getter]
    fn final_overlap_psi0(&self) -> Option<f64> {
        self.inner.final_summary.overlap_psi0
    }

    #[getter]
    fn n_plus_total(&self) -> usize {
        self.inner.final_summary.n_plus_total
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

/// Batch aggregate: capture statistics plus every trace.
#[pyclass(module = "spinpair_py")]
struct Batch {
    traces: Vec<TrajectoryTrace>,
    capture: Option<(usize, usize, f64, f64, f64)>,
}

#[pymethods]
impl Batch {
    #[getter]
    fn capture_fraction(&self) -> Option<f64> {
        self.capture.map(|c| c.2)
    }

    #[getter]
    fn capture_counts(&self) -> Option<(usize, usize)> {
        self.capture.map(|c| (c.0, c.1))
    }

    #[getter]
    fn capture_ci(&self) -> Option<(f64, f64)> {
        self.capture.map(|c| (c.3, c.4))
    }

    fn traces(&self) -> Vec<Trace> {
        self.traces
            .iter()
            .map(|t| Trace { inner: t.clone() })
            .collect()
    }

    fn __len__(&self) -> usize {
        self.traces.len()
    }
}

/// Run one trajectory (stream `index` of the config's seed).
#[pyfunction]
fn run_trajectory(config: &Config, index: usize) -> PyResult<Trace> {
    trajectory::run_trajectory(&config.inner, index)
        .map(|inner| Trace { inner })
        .map_err(to_py)
}

/// Run the whole batch the config describes.
#[pyfunction]
fn run_batch(config: &Config) -> PyResult<Batch> {
    let result = trajectory::run_batch(&config.inner).map_err(to_py)?;
    Ok(Batch {
        capture: result
            .capture
            .map(|s| (s.captured, s.total, s.fraction, s.ci_low, s.ci_high)),
        traces: result.traces,
    })
}

/// Candidate peak centers and rms width for a click record (n_plus out of
/// n_total) on two equal samples.
#[pyfunction]
fn predict_peak(
    atoms_per_sample: u32,
    chi_tau: f64,
    n_plus: usize,
    n_total: usize,
) -> PyResult<(Vec<f64>, f64)> {
    measurement::predict_peak(atoms_per_sample, chi_tau, n_plus, n_total)
        .map(|p| (p.centers, p.width_rms))
        .map_err(to_py)
}

#[pymodule]
fn spinpair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<ClickSampler>()?;
    m.add_class::<Config>()?;
    m.add_class::<Trace>()?;
    m.add_class::<Batch>()?;
    m.add_function(wrap_pyfunction!(run_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(predict_peak, m)?)?;
    Ok(())
}

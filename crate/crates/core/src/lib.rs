//! Stochastic trajectory simulator for a pair of collective atomic spins
//! probed by single-photon interferometric detection.
//!
//! Two samples of `N` two-level atoms each are tracked as a joint amplitude
//! grid over the product Dicke basis. Every detected probe photon applies a
//! diagonal back-action that sharpens the collective projection
//! `J1z + J2z`; opposite-angle spin rotations between (or before) clicks
//! redirect the measurement onto other collective components, so repeated
//! detection steers the pair toward the maximally entangled state — the
//! unique common null eigenstate the protocol can no longer kick out of.
//!
//! The crate is organized along the pipeline: [`spin`] holds states and
//! rotations, [`measurement`] the click statistics and back-action,
//! [`metrics`] the recorded observables, [`trajectory`] the protocols and
//! batch runner, and [`cli`]/[`output`] the command-line and artifact
//! layers.

pub mod cli;
pub mod error;
pub mod measurement;
pub mod metrics;
pub mod output;
pub mod spin;
pub mod trajectory;

pub use error::{Result, SimError};
pub use measurement::{
    click_probabilities, entangling_factor, predict_peak, project_on_click, sample_click,
    ClickRecord, Detector, PeakPrediction,
};
pub use metrics::{
    density_entropy_bits, entanglement_entropy, overlap_psi0, psi0_state, reduced_density_matrix,
    variance_jz_sum, MetricsSample, Sample,
};
pub use spin::{
    ladder_coefficient, rotation_matrix, JointAmplitudes, LadderDirection, RotationMatrix,
    SpinBasis, SpinExpectations,
};
pub use trajectory::{
    compatible_peak_center, run_batch, run_protocol_a, run_protocol_b, run_protocol_c,
    run_trajectory, trajectory_rng, AveragedRow, BatchResult, CaptureStats, FinalSummary,
    Protocol, ProtocolConfig, TraceRow, TrajectoryRng, TrajectoryTrace,
    CAPTURE_OVERLAP_THRESHOLD,
};

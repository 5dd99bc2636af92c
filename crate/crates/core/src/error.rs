use std::path::PathBuf;

use thiserror::Error;

/// Failure modes of the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// A caller-supplied value is out of range or inconsistent (bad atom
    /// count, zero coupling, mismatched grid shape, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state object violates an invariant it is supposed to maintain,
    /// e.g. an amplitude grid whose norm has drifted away from one.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A detection branch with (numerically) zero probability was requested;
    /// projecting onto it would divide by zero and signals a sampling bug.
    #[error("impossible outcome: {0}")]
    ImpossibleOutcome(String),

    /// The requested quantity is undefined for this configuration, e.g. the
    /// maximally-entangled-state overlap when the two samples differ in size.
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;

//! Simulation toolkit for fault-tolerant quantum memory built from a linear
//! array of photon emitters and delay lines.
//!
//! The pipeline mirrors the physical scheme end to end:
//!
//! 1. [`lattice`] builds the periodic 3D cluster lattice, its parity checks,
//!    logical membranes, and the per-emitter slab partition / emission order.
//! 2. [`compiler`] turns an emission plan into a timed Clifford circuit for
//!    one of the four generation protocols (S1, S2, M1, M2).
//! 3. [`noise`] annotates circuits with circuit-level depolarizing noise,
//!    delay-line dephasing, and heralded loss.
//! 4. [`sim`] provides a stabilizer-tableau oracle and a Pauli-frame sampler.
//! 5. [`decoder`] derives the detector error model and decodes syndromes with
//!    exact minimum-weight perfect matching (erasures become weight-0 edges).
//! 6. [`experiments`] orchestrates Monte Carlo sweeps, threshold fits, and
//!    delay-line scaling fits.

pub mod bits;
pub mod circuit;
pub mod compiler;
pub mod decoder;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod rng;
pub mod sim;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice size: {0}")]
    InvalidLattice(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("matching condition violated at vertices {0:?}")]
    MatchingCondition(Vec<u32>),
    #[error("emission scheduler deadlocked at global step {0}")]
    ScheduleDeadlock(usize),
    #[error("compile error: {0}")]
    Compile(String),
    #[error("cluster-state verification failed: {0}")]
    Verify(String),
    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),
    #[error("detector error model: {0}")]
    Dem(String),
    #[error("decoder invariant violated: {0}")]
    Decoder(String),
    #[error("fit rejected: {0}")]
    Fit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

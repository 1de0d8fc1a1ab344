//! Clifford simulation back-ends.
//!
//! [`tableau`] is the exact stabilizer oracle used for correctness checks;
//! [`frame`] is the fast Pauli-frame sampler used for Monte Carlo; and
//! [`propagate`] computes where single faults land, both one at a time
//! (forward) and for every location at once (backward influence maps).

pub mod frame;
pub mod propagate;
pub mod tableau;

pub use frame::{frame_sample, FrameSample, FrameSimulator};
pub use propagate::{enumerate_fault_effects, propagate_fault, FaultEffect, PauliTerm};
pub use tableau::{run_circuit, MeasureOutcome, Tableau, TableauRun};

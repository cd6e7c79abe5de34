//! Sequential remote state preparation with unsharp measurements.
//!
//! A two-qubit state is shared between a receiver (first qubit) and a
//! queue of senders who take turns on the second qubit. Each sender
//! measures unsharply along a target state drawn from a fixed Bloch circle
//! and forwards one bit; the receiver applies a correction or post-selects.
//! The crate computes the receiver's average fidelity per sender, the
//! classical one-bit bound it must beat, the sharpness each sender needs,
//! and the discord and entanglement left over along the way.

pub mod cascade;
pub mod classical;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod resources;
pub mod solver;
pub mod states;
pub mod trajectory;

pub use cascade::{
    average_fidelity, kept_branch_fidelity, numeric_average_fidelity, run_cascade, shared_state,
    shared_state_correlations, CascadeReport, ProtocolConfig, SharpnessChain, Target, MAX_CHAIN,
};
pub use classical::{classical_bound, optimize_classical};
pub use error::{Result, RspError};
pub use linalg::CMatrix;
pub use resources::{concurrence, geometric_discord, max_remaining_resource, tau, ResourceReport};
pub use solver::{boundary_table, lambda_min, max_bobs, min_chain, Axis, FeasibilityResult};
pub use states::{BellDiagonalCoeffs, BellKind, CircleRegime, InitialFamily};
pub use trajectory::{regression_panel, simulate, TrajectoryRun};

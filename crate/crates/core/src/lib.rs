//! Simulation laboratory for sparse SYK dynamics driven by randomized
//! Pauli-rotation circuits.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! * [`pauli`] — signed Pauli strings in symplectic (x, z) form.
//! * [`syk`] — disorder sampling of dense/sparse SYK Hamiltonians and their
//!   Jordan-Wigner encoding into Pauli sums.
//! * [`state`] — statevector simulation over 1 ancilla + L system qubits,
//!   exact evolution oracles, shot sampling, stochastic noise injection.
//! * [`tetris`] — randomized time-evolution circuits sampled from Poisson
//!   processes, with attenuation and gate-count accounting.
//! * [`trotter`] — first-order product formulas and the cost crossover study.
//! * [`estimators`] — echo-verified observables, large-gate-angle
//!   extrapolation, and shot-allocation formulas.
//! * [`noise_theory`] — the Volterra-equation noise model and rate fitting.
//! * [`mirror`] — standard and averaged mirror-circuit benchmarks.
//! * [`resources`] — closed-form gate-count and runtime estimates.

pub mod error;
pub mod estimators;
pub mod mirror;
pub mod noise_theory;
pub mod pauli;
pub mod resources;
pub mod rng;
pub mod state;
pub mod syk;
pub mod tetris;
pub mod trotter;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::CoreError;
pub use pauli::SignedPauliString;
pub use state::{Control, NoiseSpec, ShotOutcome, StateVector};
pub use syk::{SparseSykInstance, SykParams};
pub use tetris::{TetrisCircuit, TetrisConfig};

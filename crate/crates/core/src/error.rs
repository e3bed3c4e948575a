//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by model construction, simulation, and estimation.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Two operands were defined over different qubit counts.
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    /// A parameter violated its contract.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The request exceeds what the simulator can represent.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// An operation received a non-Hermitian Pauli string where a Hermitian
    /// one is required (rotation generators must square to the identity).
    #[error("non-Hermitian Pauli string: phase is ±i")]
    NonHermitian,

    /// Numerical domain failure (e.g. logarithm of a non-positive estimate).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data did not allow the estimate to be formed.
    #[error("estimation error: {0}")]
    Estimation(String),
}

impl CoreError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

//! Closed-form scaling calculators for large-system cost projections.
//!
//! Everything here is an order-of-magnitude estimate: no circuits are
//! executed and no uncertainty model is attached. The counts assume a
//! ternary-tree fermion encoding where a single fermion operator maps to a
//! Pauli weight log₃(2L), so one time evolution for time Jt costs about
//! 2k·(Jt)²·L²·log₃(2L) two-qubit gates, and an out-of-time-ordered
//! correlator (four evolutions at the scrambling time Jt = ln 2L) costs
//! 8k·(ln(2L)·L)²·log₃(2L).

use crate::error::CoreError;

/// Inputs for one projection.
#[derive(Debug, Clone, Copy)]
pub struct ResourceQuery {
    pub l_qubits: usize,
    pub sparsity_k: f64,
    /// Dimensionless evolution time; `None` selects the scrambling-time
    /// preset Jt = ln(2L).
    pub jt: Option<f64>,
    /// Wall-clock seconds per unit of circuit depth.
    pub depth_time_s: f64,
    /// Divide the runtime by the gate-parallelism factor ⌊L/log₃L⌋.
    pub parallel: bool,
}

impl ResourceQuery {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.l_qubits < 2 {
            return Err(CoreError::invalid("l_qubits", "need L ≥ 2"));
        }
        if self.sparsity_k < 0.0 {
            return Err(CoreError::invalid("sparsity_k", "negative sparsity"));
        }
        if let Some(jt) = self.jt {
            if jt < 0.0 {
                return Err(CoreError::invalid("jt", "negative time"));
            }
        }
        if self.depth_time_s < 0.0 {
            return Err(CoreError::invalid("depth_time_s", "negative depth time"));
        }
        Ok(())
    }

    pub fn effective_jt(&self) -> f64 {
        self.jt.unwrap_or_else(|| (2.0 * self.l_qubits as f64).ln())
    }
}

fn log3(x: f64) -> f64 {
    x.ln() / 3.0f64.ln()
}

/// TQ gates for one e^{±iHt}: 2k·(Jt)²·L²·log₃(2L).
pub fn evolution_tq_count(query: &ResourceQuery) -> f64 {
    let l = query.l_qubits as f64;
    let jt = query.effective_jt();
    2.0 * query.sparsity_k * jt * jt * l * l * log3(2.0 * l)
}

/// Total TQ gates for the four-evolution correlator; at the scrambling-time
/// preset this is exactly 8k·(ln(2L)·L)²·log₃(2L).
pub fn otoc_tq_count(query: &ResourceQuery) -> f64 {
    4.0 * evolution_tq_count(query)
}

/// Number of gates executable in parallel with ancilla support: ⌊L/log₃L⌋.
pub fn parallel_factor(l_qubits: usize) -> u64 {
    (l_qubits as f64 / log3(l_qubits as f64)).floor() as u64
}

/// Projected wall-clock runtime for a gate count.
#[derive(Debug, Clone, Copy)]
pub struct RuntimeEstimate {
    pub serial_s: f64,
    pub parallel_factor: Option<u64>,
    pub parallel_s: Option<f64>,
}

impl RuntimeEstimate {
    pub fn serial_hours(&self) -> f64 {
        self.serial_s / 3600.0
    }

    pub fn parallel_hours(&self) -> Option<f64> {
        self.parallel_s.map(|s| s / 3600.0)
    }
}

/// Runtime = gate count × depth time, optionally divided by the
/// parallelism factor.
pub fn runtime_estimate(query: &ResourceQuery, tq_count: f64) -> RuntimeEstimate {
    let serial_s = tq_count * query.depth_time_s;
    if query.parallel {
        let factor = parallel_factor(query.l_qubits).max(1);
        RuntimeEstimate {
            serial_s,
            parallel_factor: Some(factor),
            parallel_s: Some(serial_s / factor as f64),
        }
    } else {
        RuntimeEstimate {
            serial_s,
            parallel_factor: None,
            parallel_s: None,
        }
    }
}

//! Randomized time-evolution circuits.
//!
//! For H = Σ c_n P_n, a circuit is a product U = e^{iτ s₁ P_{j₁}} ··· e^{iτ
//! s_M P_{j_M}} whose factors arrive from independent Poisson processes with
//! rates |c_n|/sin τ over the physical time t. The sample average obeys
//!
//! ```text
//!   E[U] = λ e^{iHt},   λ = e^{−tμ·tan(τ/2)},   μ = Σ |c_n| .
//! ```
//!
//! Merged Poisson streams for a time-independent Hamiltonian are
//! exchangeable, so instead of sampling event times the circuit draws
//! M ~ Poisson(tμ/sin τ) i.i.d. term labels with weights |c_n|/μ; the label
//! sequence already is a uniformly random ordering in law. Rotation signs
//! follow the coupling signs, keeping |c_n| as the Poisson rates.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::pauli::SignedPauliString;
use crate::state::{
    depolarize_after_gate, random_system_pauli, Control, NoiseSpec, StateVector,
};
use crate::syk::SparseSykInstance;

/// Angles are clamped this far below π/2.
const ANGLE_CLAMP_MARGIN: f64 = 1e-6;

/// Gate angle plus evolution time for one circuit family.
#[derive(Debug, Clone, Copy)]
pub struct TetrisConfig<'a> {
    pub instance: &'a SparseSykInstance,
    /// Physical evolution time in units of 1/J.
    pub time: f64,
    /// Rotation angle τ ∈ (0, π/2).
    pub gate_angle: f64,
}

impl<'a> TetrisConfig<'a> {
    pub fn new(instance: &'a SparseSykInstance, time: f64, gate_angle: f64) -> Result<Self, CoreError> {
        if time < 0.0 {
            return Err(CoreError::invalid("time", "negative evolution time"));
        }
        if !(gate_angle > 0.0 && gate_angle < std::f64::consts::FRAC_PI_2) {
            return Err(CoreError::invalid(
                "gate_angle",
                format!("τ = {gate_angle} outside (0, π/2)"),
            ));
        }
        Ok(Self {
            instance,
            time,
            gate_angle,
        })
    }

    /// λ = e^{−tμ·tan(τ/2)}.
    pub fn attenuation(&self) -> f64 {
        attenuation(self.time, self.instance.one_norm(), self.gate_angle)
    }

    /// E[M] = tμ/sin τ.
    pub fn expected_rotations(&self) -> f64 {
        self.time * self.instance.one_norm() / self.gate_angle.sin()
    }

    /// Expected accounted TQ gates per circuit: E[M] times the
    /// rate-weighted mean of 2(w_n − 1).
    pub fn expected_tq_gates(&self) -> f64 {
        self.expected_rotations() * expected_tq_per_rotation(self.instance)
    }
}

/// λ = e^{−tμ·tan(τ/2)} for arbitrary inputs.
pub fn attenuation(time: f64, one_norm: f64, gate_angle: f64) -> f64 {
    (-time * one_norm * (gate_angle / 2.0).tan()).exp()
}

/// The cost-optimal gate angle, min(1/(tμ), π/2 − ε).
pub fn optimal_angle(time: f64, one_norm: f64) -> f64 {
    let raw = 1.0 / (time * one_norm);
    raw.min(std::f64::consts::FRAC_PI_2 - ANGLE_CLAMP_MARGIN)
}

/// A rescaled angle c/(tμ), clamped below π/2. The shallow-circuit choice
/// is c = 1.5; deep circuits rescale by a further factor α.
pub fn scaled_angle(factor: f64, time: f64, one_norm: f64) -> f64 {
    (factor / (time * one_norm)).min(std::f64::consts::FRAC_PI_2 - ANGLE_CLAMP_MARGIN)
}

/// Rate-weighted mean of 2(weight − 1) over the instance's terms.
pub fn expected_tq_per_rotation(instance: &SparseSykInstance) -> f64 {
    let mu = instance.one_norm();
    if mu == 0.0 {
        return 0.0;
    }
    instance
        .terms()
        .iter()
        .map(|t| t.coefficient.abs() / mu * tq_gates_for_weight(t.string.weight()))
        .sum()
}

fn tq_gates_for_weight(weight: u32) -> f64 {
    2.0 * (weight.max(1) - 1) as f64
}

/// One sampled rotation: a term index and the sign of its coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetrisEvent {
    pub term_index: usize,
    /// +1 or −1; the applied rotation is e^{i·sign·τ·P}.
    pub sign: i8,
}

/// An ordered list of rotation events with gate-count accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetrisCircuit {
    pub events: Vec<TetrisEvent>,
    /// Σ over events of 2(weight − 1).
    pub tq_gate_estimate: u64,
}

impl TetrisCircuit {
    pub fn rotation_count(&self) -> usize {
        self.events.len()
    }

    /// The exact inverse: reversed events with negated rotation signs.
    pub fn inverse(&self) -> TetrisCircuit {
        TetrisCircuit {
            events: self
                .events
                .iter()
                .rev()
                .map(|e| TetrisEvent {
                    term_index: e.term_index,
                    sign: -e.sign,
                })
                .collect(),
            tq_gate_estimate: self.tq_gate_estimate,
        }
    }
}

/// Draw one circuit: M ~ Poisson(tμ/sin τ) events with term weights |c_n|/μ.
pub fn sample_circuit<R: Rng>(config: &TetrisConfig, rng: &mut R) -> Result<TetrisCircuit, CoreError> {
    let instance = config.instance;
    if instance.n_terms() == 0 {
        return Err(CoreError::invalid("instance", "no Hamiltonian terms"));
    }
    let mean = config.expected_rotations();
    let m = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| CoreError::invalid("rate", e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };

    // Cumulative |c|/μ table for term selection.
    let mu = instance.one_norm();
    let mut cdf = Vec::with_capacity(instance.n_terms());
    let mut acc = 0.0;
    for term in instance.terms() {
        acc += term.coefficient.abs() / mu;
        cdf.push(acc);
    }

    let mut events = Vec::with_capacity(m);
    let mut tq = 0u64;
    for _ in 0..m {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        let term = &instance.terms()[idx];
        events.push(TetrisEvent {
            term_index: idx,
            sign: if term.coefficient >= 0.0 { 1 } else { -1 },
        });
        tq += tq_gates_for_weight(term.string.weight()) as u64;
    }
    Ok(TetrisCircuit {
        events,
        tq_gate_estimate: tq,
    })
}

/// The CNOT-ladder qubit pairs accounted for one weight-w rotation:
/// adjacent support pairs walked down and back up, 2(w−1) in total.
fn ladder_pairs(string: &SignedPauliString) -> Vec<(usize, usize)> {
    let support: Vec<usize> = (0..string.n_qubits())
        .filter(|&q| string.site(q) != 'I')
        .collect();
    if support.len() < 2 {
        return Vec::new();
    }
    let down: Vec<(usize, usize)> = support.windows(2).map(|w| (w[0], w[1])).collect();
    let mut pairs = down.clone();
    pairs.extend(down.into_iter().rev());
    pairs
}

/// Execute a circuit on `state`, restricted to an ancilla branch when
/// requested, injecting noise per the spec.
///
/// Per-gate mode flips a depolarizing coin for every accounted TQ gate of
/// every rotation; global mode interleaves K ~ Poisson(rate·t) whole-register
/// Pauli events uniformly among the rotations (the uniform interleaving is
/// the time-ordering law of the two merged Poisson processes). Noise events
/// act on the system register unconditioned on the ancilla.
pub fn run_conditional<R: Rng>(
    circuit: &TetrisCircuit,
    config: &TetrisConfig,
    state: &mut StateVector,
    control: Control,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<(), CoreError> {
    noise.validate()?;
    let instance = config.instance;
    let tau = config.gate_angle;

    match *noise {
        NoiseSpec::None | NoiseSpec::PerGate { .. } => {
            let p_dep = match *noise {
                NoiseSpec::PerGate { p_dep } => p_dep,
                _ => 0.0,
            };
            for event in &circuit.events {
                apply_event(instance, event, tau, state, control)?;
                if p_dep > 0.0 {
                    let string = &instance.terms()[event.term_index].string;
                    for (qa, qb) in ladder_pairs(string) {
                        depolarize_after_gate(state, qa, qb, p_dep, rng)?;
                    }
                }
            }
        }
        NoiseSpec::Global { rate } => {
            let expected = rate * config.time;
            let n_noise = if expected > 0.0 {
                Poisson::new(expected)
                    .map_err(|e| CoreError::invalid("rate", e.to_string()))?
                    .sample(rng) as usize
            } else {
                0
            };
            // Random interleaving of M rotation slots and K noise slots.
            let m = circuit.events.len();
            let total = m + n_noise;
            let mut noise_left = n_noise;
            let mut event_iter = circuit.events.iter();
            for slot in 0..total {
                let remaining = total - slot;
                let is_noise =
                    noise_left > 0 && rng.random_range(0..remaining) < noise_left;
                if is_noise {
                    let pauli = random_system_pauli(state.n_system(), rng);
                    state.apply_pauli(&pauli)?;
                    noise_left -= 1;
                } else {
                    let event = event_iter.next().expect("slot accounting");
                    apply_event(instance, event, tau, state, control)?;
                }
            }
        }
    }
    Ok(())
}

fn apply_event(
    instance: &SparseSykInstance,
    event: &TetrisEvent,
    tau: f64,
    state: &mut StateVector,
    control: Control,
) -> Result<(), CoreError> {
    let term = &instance.terms()[event.term_index];
    state.apply_pauli_rotation(&term.string, f64::from(event.sign) * tau, control)
}

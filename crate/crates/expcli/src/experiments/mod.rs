//! Built-in experiment strategies.

mod angle_sweep;
mod lgae_protocol;
mod loschmidt_scan;
mod mirror_sweep;
mod noise_overlay;
mod resources;
mod trotter_crossover;
mod variance_study;

use serde::{Deserialize, Serialize};
use syklab_core::estimators::EchoObservable;
use syklab_core::rng::{stream_rng, Channel};
use syklab_core::state::{Control, ExactEvolver, NoiseSpec, StateVector};
use syklab_core::syk::{sample_instance_with, SparseSykInstance, SykParams};
use syklab_core::tetris::{run_conditional, sample_circuit, TetrisConfig};

use crate::registry::Experiment;
use crate::ExpError;

/// All built-in experiments, one per config kind.
pub fn builtin() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(loschmidt_scan::LoschmidtScan),
        Box::new(variance_study::VarianceStudy),
        Box::new(angle_sweep::AngleSweep),
        Box::new(lgae_protocol::LgaeHardwareProtocol),
        Box::new(noise_overlay::NoiseModelOverlay),
        Box::new(trotter_crossover::TrotterCrossover),
        Box::new(mirror_sweep::MirrorSweep),
        Box::new(resources::Resources),
    ]
}

/// Instance selection per task: fresh disorder per circuit (joint) or a
/// fixed pool of `ensemble` instances cycled by task index.
pub(crate) fn task_instance(
    params: &SykParams,
    seed: u64,
    joint: bool,
    ensemble: usize,
    task_id: u64,
) -> Result<SparseSykInstance, ExpError> {
    let stream = if joint {
        task_id
    } else {
        task_id % ensemble.max(1) as u64
    };
    let mut rng = stream_rng(seed, Channel::Disorder, stream);
    Ok(sample_instance_with(params, &mut rng)?)
}

/// Per-circuit result of one echo-verified run: λ⁻¹-rescaled circuit means
/// for the three observables, plus accounting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct EchoCircuitValue {
    /// Indexed like [`EchoObservable::ALL`].
    pub values: [f64; 3],
    pub tq: u64,
    pub rotations: usize,
    pub lambda: f64,
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_re: Option<f64>,
}

/// Sample one circuit on |+⟩⊗|0…0⟩ (unitary on the ancilla=1 branch),
/// measure `shots` shots, and return rescaled circuit means.
#[allow(clippy::too_many_arguments)]
pub(crate) fn echo_circuit(
    instance: &SparseSykInstance,
    time: f64,
    tau: f64,
    noise: &NoiseSpec,
    shots: usize,
    want_exact: bool,
    seed: u64,
    task_id: u64,
) -> Result<EchoCircuitValue, ExpError> {
    let config = TetrisConfig::new(instance, time, tau)?;
    let lambda = config.attenuation();
    let mut circuit_rng = stream_rng(seed, Channel::Circuit, task_id);
    let circuit = sample_circuit(&config, &mut circuit_rng)?;

    let mut state = StateVector::ancilla_plus_system_zero(instance.params().l_qubits());
    let mut noise_rng = stream_rng(seed, Channel::Noise, task_id);
    run_conditional(
        &circuit,
        &config,
        &mut state,
        Control::AncillaIs(1),
        noise,
        &mut noise_rng,
    )?;

    let mut shot_rng = stream_rng(seed, Channel::Shots, task_id);
    let outcomes = state.sample_shots(shots, &mut shot_rng);
    let mut values = [0.0f64; 3];
    for shot in &outcomes {
        for (slot, obs) in EchoObservable::ALL.iter().enumerate() {
            values[slot] += obs.shot_value(shot);
        }
    }
    for v in values.iter_mut() {
        *v /= shots as f64 * lambda;
    }

    let exact_re = if want_exact {
        Some(ExactEvolver::new(instance)?.loschmidt(time).re)
    } else {
        None
    };
    Ok(EchoCircuitValue {
        values,
        tq: circuit.tq_gate_estimate,
        rotations: circuit.rotation_count(),
        lambda,
        tau,
        exact_re,
    })
}

/// Mean and standard error over f64 samples; SE is `None` below 2 samples.
pub(crate) fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Population standard deviation over circuit-level means (the quantity
/// plotted in variance studies), plus its SEM companion.
pub(crate) fn sd_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (var.sqrt(), (var / n).sqrt())
}

pub(crate) fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub(crate) fn from_value<T: serde::de::DeserializeOwned>(
    value: &serde_json::Value,
) -> Result<T, ExpError> {
    serde_json::from_value(value.clone()).map_err(ExpError::from)
}

//! Mirror-circuit noise benchmarks.
//!
//! The averaged variant applies two independently sampled circuits U, U′ on
//! complementary ancilla branches of |+⟩⊗|0…0⟩; only on average is the
//! composite proportional to the identity, with
//!
//! ```text
//!   Tr[ρ_ave (X⊗𝒪)] = λ²·⟨0|e^{−iHt}𝒪e^{iHt}|0⟩ ,
//! ```
//!
//! so the rescaled ancilla signal has the known noiseless value 1 while the
//! same shots also estimate a local observable in the evolved state. The
//! standard benchmark runs one circuit followed by its exact gate-by-gate
//! inverse and reports the all-zeros survival probability of the system
//! register alone.
//!
//! Per-sample values are evaluated exactly from the trajectory state; the
//! reported error bars are the spread over sampled (circuit, noise)
//! trajectories, which bounds what any shot-based estimate could achieve.

use crate::error::CoreError;
use crate::estimators::aggregate_circuit_means;
use crate::rng::{stream_rng, Channel};
use crate::state::{Control, NoiseSpec, StateVector};
use crate::syk::SparseSykInstance;
use crate::tetris::{run_conditional, sample_circuit, TetrisConfig};

/// One benchmark configuration at a fixed instance, time and angle.
#[derive(Debug, Clone, Copy)]
pub struct MirrorRunSpec {
    pub time: f64,
    pub gate_angle: f64,
    pub noise: NoiseSpec,
    /// Sampled (circuit, noise) trajectories.
    pub samples: usize,
    pub seed: u64,
}

/// Mean and standard error of one benchmark quantity.
#[derive(Debug, Clone, Copy)]
pub struct BenchPoint {
    pub mean: f64,
    pub std_error: Option<f64>,
}

/// Output of the averaged mirror benchmark.
#[derive(Debug, Clone)]
pub struct MirrorOnAverageResult {
    /// λ⁻²⟨X⊗I⟩; 1 in the noiseless limit.
    pub survival: BenchPoint,
    /// λ⁻²⟨X⊗𝒪_loc⟩ with 𝒪_loc = (1/L)Σ_j Z_j.
    pub local_obs: BenchPoint,
    /// Mean accounted TQ gates per executed circuit pair.
    pub mean_tq: f64,
}

/// Output of the standard mirror benchmark.
#[derive(Debug, Clone)]
pub struct StandardMirrorResult {
    /// All-zeros survival probability of the system register.
    pub survival: BenchPoint,
    /// Mean accounted TQ gates per executed U·U† circuit.
    pub mean_tq: f64,
}

/// Z-string diagonal of 𝒪_loc = (1/L)Σ_j Z_j on a system bitstring.
fn local_z_diagonal(l: usize, bits: u64) -> f64 {
    (l as f64 - 2.0 * bits.count_ones() as f64) / l as f64
}

/// Run the mirror-on-average benchmark on one instance.
pub fn mirror_on_average(
    instance: &SparseSykInstance,
    spec: &MirrorRunSpec,
) -> Result<MirrorOnAverageResult, CoreError> {
    spec.noise.validate()?;
    if spec.samples < 2 {
        return Err(CoreError::invalid("samples", "need ≥ 2 trajectories"));
    }
    let l = instance.params().l_qubits();
    let config = TetrisConfig::new(instance, spec.time, spec.gate_angle)?;
    let lambda_sq = config.attenuation().powi(2);

    let mut survival = Vec::with_capacity(spec.samples);
    let mut local = Vec::with_capacity(spec.samples);
    let mut tq_sum = 0.0;
    for sample in 0..spec.samples as u64 {
        let mut circuit_rng = stream_rng(spec.seed, Channel::Circuit, sample);
        let u = sample_circuit(&config, &mut circuit_rng)?;
        let u_prime = sample_circuit(&config, &mut circuit_rng)?;
        tq_sum += (u.tq_gate_estimate + u_prime.tq_gate_estimate) as f64;

        let mut state = StateVector::ancilla_plus_system_zero(l);
        let mut noise_rng = stream_rng(spec.seed, Channel::Noise, sample);
        run_conditional(
            &u,
            &config,
            &mut state,
            Control::AncillaIs(0),
            &spec.noise,
            &mut noise_rng,
        )?;
        run_conditional(
            &u_prime,
            &config,
            &mut state,
            Control::AncillaIs(1),
            &spec.noise,
            &mut noise_rng,
        )?;

        survival.push(state.expect_x_ancilla_diag(|_| 1.0)? / lambda_sq);
        local.push(state.expect_x_ancilla_diag(|bits| local_z_diagonal(l, bits))? / lambda_sq);
    }
    let (s_mean, s_se) = aggregate_circuit_means(&survival)?;
    let (o_mean, o_se) = aggregate_circuit_means(&local)?;
    Ok(MirrorOnAverageResult {
        survival: BenchPoint {
            mean: s_mean,
            std_error: s_se,
        },
        local_obs: BenchPoint {
            mean: o_mean,
            std_error: o_se,
        },
        mean_tq: tq_sum / spec.samples as f64,
    })
}

/// Run the standard mirror benchmark (U then its exact inverse) on one
/// instance.
pub fn standard_mirror(
    instance: &SparseSykInstance,
    spec: &MirrorRunSpec,
) -> Result<StandardMirrorResult, CoreError> {
    spec.noise.validate()?;
    if spec.samples < 2 {
        return Err(CoreError::invalid("samples", "need ≥ 2 trajectories"));
    }
    let l = instance.params().l_qubits();
    let config = TetrisConfig::new(instance, spec.time, spec.gate_angle)?;

    let mut survival = Vec::with_capacity(spec.samples);
    let mut tq_sum = 0.0;
    for sample in 0..spec.samples as u64 {
        let mut circuit_rng = stream_rng(spec.seed, Channel::Circuit, sample);
        let u = sample_circuit(&config, &mut circuit_rng)?;
        tq_sum += 2.0 * u.tq_gate_estimate as f64;

        let mut state = StateVector::system_zero(l);
        let mut noise_rng = stream_rng(spec.seed, Channel::Noise, sample);
        run_conditional(&u, &config, &mut state, Control::None, &spec.noise, &mut noise_rng)?;
        run_conditional(
            &u.inverse(),
            &config,
            &mut state,
            Control::None,
            &spec.noise,
            &mut noise_rng,
        )?;
        survival.push(state.prob_system_all_zeros());
    }
    let (mean, se) = aggregate_circuit_means(&survival)?;
    Ok(StandardMirrorResult {
        survival: BenchPoint {
            mean,
            std_error: se,
        },
        mean_tq: tq_sum / spec.samples as f64,
    })
}

/// The gate-fidelity reference curve (1 − 15p/16)^G.
pub fn process_fidelity_curve(p_dep: f64, mean_tq: f64) -> f64 {
    (1.0 - 15.0 * p_dep / 16.0).powf(mean_tq)
}

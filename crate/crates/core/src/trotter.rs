//! First-order product formulas and the cost comparison against the
//! randomized sampler.
//!
//! e^{iHt} ≈ (e^{ic₁P₁t/s}···e^{ic_MP_Mt/s})^s with discretization error
//! O(t²/s); each weight-w rotation is accounted as 2(w−1) two-qubit gates,
//! so one step costs Σ_n 2(w_n − 1).

use num_complex::Complex64;
use rand::seq::SliceRandom;

use crate::error::CoreError;
use crate::rng::{stream_rng, Channel};
use crate::state::{Control, ExactEvolver, StateVector};
use crate::syk::{sample_instance_with, SparseSykInstance, SykParams};
use crate::tetris::{expected_tq_per_rotation, optimal_angle};

/// How the term sequence inside one step is ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermOrdering {
    /// Descending |c_n|; the default, recorded for reproducibility.
    DescendingMagnitude,
    /// Seeded uniform shuffle.
    Shuffled(u64),
}

/// A concrete Trotterization: step count, term order, gate accounting.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    pub steps: usize,
    pub term_order: Vec<usize>,
    pub tq_gate_count: u64,
}

impl TrotterPlan {
    pub fn new(
        instance: &SparseSykInstance,
        steps: usize,
        ordering: TermOrdering,
    ) -> Result<Self, CoreError> {
        if steps == 0 {
            return Err(CoreError::invalid("steps", "need s ≥ 1"));
        }
        let mut order: Vec<usize> = (0..instance.n_terms()).collect();
        match ordering {
            TermOrdering::DescendingMagnitude => {
                order.sort_by(|&a, &b| {
                    let ca = instance.terms()[a].coefficient.abs();
                    let cb = instance.terms()[b].coefficient.abs();
                    cb.partial_cmp(&ca).unwrap().then(a.cmp(&b))
                });
            }
            TermOrdering::Shuffled(seed) => {
                let mut rng = stream_rng(seed, Channel::Scratch, 0);
                order.shuffle(&mut rng);
            }
        }
        let per_step: u64 = instance
            .terms()
            .iter()
            .map(|t| 2 * (u64::from(t.string.weight().max(1)) - 1))
            .sum();
        Ok(Self {
            steps,
            term_order: order,
            tq_gate_count: steps as u64 * per_step,
        })
    }
}

/// Execute the plan on `state`; returns the number of accounted TQ gates
/// actually applied (an explicit per-gate trace of the circuit).
pub fn build_and_run(
    instance: &SparseSykInstance,
    t: f64,
    plan: &TrotterPlan,
    state: &mut StateVector,
) -> Result<u64, CoreError> {
    let dt = t / plan.steps as f64;
    let mut executed = 0u64;
    for _ in 0..plan.steps {
        for &idx in &plan.term_order {
            let term = &instance.terms()[idx];
            state.apply_pauli_rotation(&term.string, term.coefficient * dt, Control::None)?;
            executed += 2 * (u64::from(term.string.weight().max(1)) - 1);
        }
    }
    Ok(executed)
}

/// ⟨0|U_trotter|0⟩ from the all-zeros state.
pub fn trotter_loschmidt(
    instance: &SparseSykInstance,
    t: f64,
    plan: &TrotterPlan,
) -> Result<Complex64, CoreError> {
    let mut state = StateVector::system_zero(instance.params().l_qubits());
    build_and_run(instance, t, plan, &mut state)?;
    Ok(state.amplitudes()[0])
}

/// |Re L_trotter − Re L_exact| / |Re L_exact|, or `None` when the exact
/// real part vanishes (flagged rather than reported as infinity).
pub fn trotter_relative_error(
    instance: &SparseSykInstance,
    t: f64,
    steps: usize,
) -> Result<Option<f64>, CoreError> {
    let evolver = ExactEvolver::new(instance)?;
    trotter_relative_error_with(&evolver, instance, t, steps)
}

/// As [`trotter_relative_error`] with a cached exact oracle.
pub fn trotter_relative_error_with(
    evolver: &ExactEvolver,
    instance: &SparseSykInstance,
    t: f64,
    steps: usize,
) -> Result<Option<f64>, CoreError> {
    let exact = evolver.loschmidt(t).re;
    if exact.abs() < 1e-12 {
        return Ok(None);
    }
    let plan = TrotterPlan::new(instance, steps, TermOrdering::DescendingMagnitude)?;
    let approx = trotter_loschmidt(instance, t, &plan)?.re;
    Ok(Some((approx - exact).abs() / exact.abs()))
}

/// Which scheme wins a cost comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    TetrisOptimal,
    Trotter(usize),
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::TetrisOptimal => write!(f, "tetris_optimal"),
            Scheme::Trotter(s) => write!(f, "trotter_s{s}"),
        }
    }
}

/// Disorder-averaged cost and error figures at one (N, t) point.
#[derive(Debug, Clone)]
pub struct CrossoverRow {
    pub n_majorana: usize,
    pub time: f64,
    /// Expected TQ gates per circuit at the cost-optimal angle
    /// (analytic Poisson mean, ensemble-averaged).
    pub tq_tetris_optimal: f64,
    /// Per-step-count Trotter TQ gates, ensemble-averaged.
    pub tq_trotter: Vec<(usize, f64)>,
    pub cheaper: Scheme,
    /// Ensemble-mean relative Trotter error per step count, with the count
    /// of instances where it was undefined (Re L_exact ≈ 0).
    pub trotter_error: Vec<(usize, Option<f64>, usize)>,
    /// Ensemble-mean exact Re L(t), the signal-level context for the cost.
    pub mean_loschmidt: f64,
}

/// Configuration of the crossover study.
#[derive(Debug, Clone)]
pub struct CrossoverConfig {
    pub sparsity_k: f64,
    pub times: Vec<f64>,
    pub ensemble: usize,
    pub steps: Vec<usize>,
    pub seed: u64,
}

/// Disorder-averaged TETRIS-vs-Trotter comparison over a time grid.
pub fn crossover_study(
    n_majorana: usize,
    config: &CrossoverConfig,
) -> Result<Vec<CrossoverRow>, CoreError> {
    if config.ensemble == 0 {
        return Err(CoreError::invalid("ensemble", "need ≥ 1 instance"));
    }
    let params = SykParams::sparse(n_majorana, config.sparsity_k, config.seed);
    params.validate()?;

    // Sample the ensemble once; reuse across the time grid.
    let mut instances = Vec::with_capacity(config.ensemble);
    for idx in 0..config.ensemble {
        let mut rng = stream_rng(config.seed, Channel::Disorder, idx as u64);
        instances.push(sample_instance_with(&params, &mut rng)?);
    }
    let evolvers: Vec<ExactEvolver> = instances
        .iter()
        .map(ExactEvolver::new)
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(config.times.len());
    for &t in &config.times {
        let mut tq_tetris = 0.0;
        let mut tq_trotter: Vec<f64> = vec![0.0; config.steps.len()];
        let mut err_sum: Vec<f64> = vec![0.0; config.steps.len()];
        let mut err_count: Vec<usize> = vec![0; config.steps.len()];
        let mut undefined: Vec<usize> = vec![0; config.steps.len()];
        let mut loschmidt_sum = 0.0;

        for (instance, evolver) in instances.iter().zip(evolvers.iter()) {
            let mu = instance.one_norm();
            let tau = optimal_angle(t, mu);
            tq_tetris += t * mu / tau.sin() * expected_tq_per_rotation(instance);
            loschmidt_sum += evolver.loschmidt(t).re;
            for (si, &s) in config.steps.iter().enumerate() {
                let plan = TrotterPlan::new(instance, s, TermOrdering::DescendingMagnitude)?;
                tq_trotter[si] += plan.tq_gate_count as f64;
                match trotter_relative_error_with(evolver, instance, t, s)? {
                    Some(e) => {
                        err_sum[si] += e;
                        err_count[si] += 1;
                    }
                    None => undefined[si] += 1,
                }
            }
        }

        let n = config.ensemble as f64;
        tq_tetris /= n;
        let tq_trotter: Vec<(usize, f64)> = config
            .steps
            .iter()
            .zip(tq_trotter.iter())
            .map(|(&s, &v)| (s, v / n))
            .collect();
        let mut cheaper = Scheme::TetrisOptimal;
        let mut best = tq_tetris;
        for &(s, v) in &tq_trotter {
            if v < best {
                best = v;
                cheaper = Scheme::Trotter(s);
            }
        }
        let trotter_error = config
            .steps
            .iter()
            .enumerate()
            .map(|(si, &s)| {
                let mean = if err_count[si] > 0 {
                    Some(err_sum[si] / err_count[si] as f64)
                } else {
                    None
                };
                (s, mean, undefined[si])
            })
            .collect();
        rows.push(CrossoverRow {
            n_majorana,
            time: t,
            tq_tetris_optimal: tq_tetris,
            tq_trotter,
            cheaper,
            trotter_error,
            mean_loschmidt: loschmidt_sum / n,
        });
    }
    Ok(rows)
}

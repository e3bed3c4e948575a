//! Exact-evolution oracles: dense eigendecomposition for small registers,
//! Lanczos stepping above that, and spectral / stochastic trace evaluation.

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rand::Rng;

use crate::error::CoreError;
use crate::rng::{stream_rng, Channel};
use crate::state::krylov::{krylov_evolve, KRYLOV_TOL};
use crate::state::StateVector;
use crate::syk::{SparseSykInstance, SykTerm};

/// Largest register solved by dense eigendecomposition.
pub const DENSE_MAX_L: usize = 10;
/// Largest register supported by the Lanczos path.
pub const KRYLOV_MAX_L: usize = 16;
/// Largest register whose full spectrum is computed for traces.
pub const TRACE_DENSE_MAX_L: usize = 12;

/// Build the dense Hamiltonian matrix Σ c_n P_n over 2^L basis states.
fn dense_hamiltonian(terms: &[SykTerm], l: usize) -> Mat<c64> {
    let dim = 1usize << l;
    let mut h = Mat::<c64>::zeros(dim, dim);
    for term in terms {
        let x = term.string.x_mask() as usize;
        let z = term.string.z_mask();
        let c0 = Complex64::new(0.0, 1.0).powu(term.string.y_count()) * term.coefficient;
        for col in 0..dim {
            let par = (col as u64 & z).count_ones() % 2;
            let val = if par == 0 { c0 } else { -c0 };
            h[(col ^ x, col)] += val;
        }
    }
    h
}

struct DenseEig {
    evals: Vec<f64>,
    evecs: Mat<c64>,
    /// |⟨0|k⟩|² per eigenvector, for fast Loschmidt evaluations.
    zero_weights: Vec<f64>,
}

impl DenseEig {
    fn new(terms: &[SykTerm], l: usize) -> Result<Self, CoreError> {
        let h = dense_hamiltonian(terms, l);
        let evd = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| CoreError::Capability(format!("eigendecomposition failed: {e:?}")))?;
        let dim = 1usize << l;
        let evals: Vec<f64> = (0..dim).map(|k| evd.S()[k].re).collect();
        let evecs = evd.U().to_owned();
        let zero_weights = (0..dim).map(|k| evecs[(0, k)].norm_sqr()).collect();
        Ok(Self {
            evals,
            evecs,
            zero_weights,
        })
    }

    fn evolve(&self, t: f64, amps: &[Complex64]) -> Vec<Complex64> {
        let dim = self.evals.len();
        // V e^{iΛt} V† ψ
        let mut proj = vec![Complex64::new(0.0, 0.0); dim];
        for (k, p) in proj.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, a) in amps.iter().enumerate() {
                acc += self.evecs[(r, k)].conj() * a;
            }
            *p = acc * Complex64::new(0.0, self.evals[k] * t).exp();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, p) in proj.iter().enumerate() {
                acc += self.evecs[(r, k)] * p;
            }
            *o = acc;
        }
        out
    }

    fn loschmidt(&self, t: f64) -> Complex64 {
        self.evals
            .iter()
            .zip(self.zero_weights.iter())
            .map(|(&e, &w)| Complex64::new(0.0, e * t).exp() * w)
            .sum()
    }
}

enum Backend {
    Dense(DenseEig),
    Krylov(Vec<SykTerm>),
}

/// Cached oracle for e^{iHt} on one instance.
pub struct ExactEvolver {
    l: usize,
    backend: Backend,
}

impl ExactEvolver {
    pub fn new(instance: &SparseSykInstance) -> Result<Self, CoreError> {
        let l = instance.params().l_qubits();
        if l > KRYLOV_MAX_L {
            return Err(CoreError::Capability(format!(
                "exact evolution at L = {l} > {KRYLOV_MAX_L}"
            )));
        }
        let backend = if l <= DENSE_MAX_L {
            Backend::Dense(DenseEig::new(instance.terms(), l)?)
        } else {
            Backend::Krylov(instance.terms().to_vec())
        };
        Ok(Self { l, backend })
    }

    pub fn l_qubits(&self) -> usize {
        self.l
    }

    /// e^{iHt} applied to raw system amplitudes.
    pub fn evolve(&self, t: f64, amps: &[Complex64]) -> Result<Vec<Complex64>, CoreError> {
        if amps.len() != 1 << self.l {
            return Err(CoreError::DimensionMismatch {
                left: amps.len().trailing_zeros() as usize,
                right: self.l,
            });
        }
        Ok(match &self.backend {
            Backend::Dense(eig) => eig.evolve(t, amps),
            Backend::Krylov(terms) => krylov_evolve(terms, self.l, t, amps, KRYLOV_TOL),
        })
    }

    /// e^{iHt} on a system-register state.
    pub fn evolve_state(&self, t: f64, state: &StateVector) -> Result<StateVector, CoreError> {
        if state.has_ancilla() {
            return Err(CoreError::invalid(
                "state",
                "exact evolution acts on the system register only",
            ));
        }
        let amps = self.evolve(t, state.amplitudes())?;
        Ok(StateVector::from_system_amplitudes(amps))
    }

    /// ⟨0|e^{iHt}|0⟩.
    pub fn loschmidt(&self, t: f64) -> Complex64 {
        match &self.backend {
            Backend::Dense(eig) => eig.loschmidt(t),
            Backend::Krylov(terms) => {
                let dim = 1usize << self.l;
                let mut e0 = vec![Complex64::new(0.0, 0.0); dim];
                e0[0] = Complex64::new(1.0, 0.0);
                krylov_evolve(terms, self.l, t, &e0, KRYLOV_TOL)[0]
            }
        }
    }
}

/// Normalized trace Tr[e^{iHt}]/2^L with an optional standard error (set
/// when the stochastic estimator produced the value).
#[derive(Debug, Clone, Copy)]
pub struct TraceEstimate {
    pub value: Complex64,
    pub std_error: Option<f64>,
}

enum TraceBackend {
    Spectrum(Vec<f64>),
    Hutchinson {
        terms: Vec<SykTerm>,
        probes: usize,
        seed: u64,
    },
}

/// Oracle for Tr[e^{iHt}]/2^L.
///
/// Up to `TRACE_DENSE_MAX_L` the full spectrum is used; beyond that a
/// Hutchinson estimator with random ±1 probe vectors propagated by the
/// Lanczos kernel, with the sample standard error reported.
pub struct TraceOracle {
    l: usize,
    backend: TraceBackend,
}

impl TraceOracle {
    pub fn new(instance: &SparseSykInstance) -> Result<Self, CoreError> {
        let l = instance.params().l_qubits();
        if l <= TRACE_DENSE_MAX_L {
            let h = dense_hamiltonian(instance.terms(), l);
            let evd = h
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| CoreError::Capability(format!("eigendecomposition failed: {e:?}")))?;
            let evals = (0..1usize << l).map(|k| evd.S()[k].re).collect();
            Ok(Self {
                l,
                backend: TraceBackend::Spectrum(evals),
            })
        } else {
            Self::new_stochastic(instance, 64, instance.params().seed ^ 0x7ace)
        }
    }

    /// Force the stochastic path (any L ≤ `KRYLOV_MAX_L`).
    pub fn new_stochastic(
        instance: &SparseSykInstance,
        probes: usize,
        seed: u64,
    ) -> Result<Self, CoreError> {
        let l = instance.params().l_qubits();
        if l > KRYLOV_MAX_L {
            return Err(CoreError::Capability(format!(
                "trace estimation at L = {l} > {KRYLOV_MAX_L}"
            )));
        }
        if probes < 2 {
            return Err(CoreError::invalid("probes", "need ≥ 2 for an error bar"));
        }
        Ok(Self {
            l,
            backend: TraceBackend::Hutchinson {
                terms: instance.terms().to_vec(),
                probes,
                seed,
            },
        })
    }

    pub fn trace(&self, t: f64) -> TraceEstimate {
        match &self.backend {
            TraceBackend::Spectrum(evals) => {
                let dim = evals.len() as f64;
                let sum: Complex64 = evals
                    .iter()
                    .map(|&e| Complex64::new(0.0, e * t).exp())
                    .sum();
                TraceEstimate {
                    value: sum / dim,
                    std_error: None,
                }
            }
            TraceBackend::Hutchinson {
                terms,
                probes,
                seed,
            } => {
                let dim = 1usize << self.l;
                let mut samples = Vec::with_capacity(*probes);
                for probe in 0..*probes {
                    let mut rng = stream_rng(*seed, Channel::Scratch, probe as u64);
                    // Rademacher probe: ⟨z|e^{iHt}|z⟩/dim estimates the
                    // normalized trace.
                    let z: Vec<Complex64> = (0..dim)
                        .map(|_| {
                            Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
                        })
                        .collect();
                    let evolved = krylov_evolve(terms, self.l, t, &z, KRYLOV_TOL);
                    let dot: Complex64 = z
                        .iter()
                        .zip(evolved.iter())
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    samples.push(dot / dim as f64);
                }
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<Complex64>() / n;
                let var = samples
                    .iter()
                    .map(|s| (s - mean).norm_sqr())
                    .sum::<f64>()
                    / (n - 1.0);
                TraceEstimate {
                    value: mean,
                    std_error: Some((var / n).sqrt()),
                }
            }
        }
    }
}

/// Tabulate g(t) = ⟨0|e^{iHt}|0⟩ and h(t) = Tr[e^{iHt}]/2^L on a grid.
pub fn tabulate_amplitudes(
    instance: &SparseSykInstance,
    times: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>), CoreError> {
    let evolver = ExactEvolver::new(instance)?;
    let tracer = TraceOracle::new(instance)?;
    let g = times.iter().map(|&t| evolver.loschmidt(t)).collect();
    let h = times.iter().map(|&t| tracer.trace(t).value).collect();
    Ok((g, h))
}

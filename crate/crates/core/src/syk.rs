//! Disorder realizations of the dense and sparse SYK model, encoded as
//! Pauli sums.
//!
//! The Hamiltonian over N Majorana fermions,
//!
//! ```text
//!   H = Σ_{i<j<k<l} p_ijkl · J_ijkl · ψ_i ψ_j ψ_k ψ_l ,
//! ```
//!
//! keeps each quadruple with probability p = kN / C(N,4) (all of them in the
//! dense model) and draws couplings as centered Gaussians with variance
//! 3!·J²/(pN³) (dense: 3!·J²/N³). Majoranas map onto L = N/2 qubits through
//! the Jordan-Wigner transformation; every encoded quadruple is a Hermitian
//! Pauli string whose ±1 phase is folded into the real coefficient.
//!
//! Majorana indices run 1..=N. Qubit q (0-based) hosts the pair
//! (ψ_{2q+1}, ψ_{2q+2}) as (X_q, Y_q) with a Z tail on qubits 0..q. Any
//! relabeling convention gives the same physics; this one is validated by
//! the anticommutation oracle in the tests.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::pauli::SignedPauliString;
use crate::rng::{stream_rng, Channel};

/// Couplings smaller than this multiple of J are dropped so the 1-norm and
/// the Poisson rates stay well-defined.
const COUPLING_FLOOR: f64 = 1e-15;

/// Ensemble parameters for one disorder draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SykParams {
    /// Number of Majorana fermions N (even, ≥ 4).
    pub n_majorana: usize,
    /// Coupling scale J; sets the units of energy and 1/time.
    pub coupling_scale: f64,
    /// Sparsity parameter k; the expected term count is kN.
    pub sparsity_k: f64,
    /// Keep every quadruple (ignores `sparsity_k` for inclusion).
    pub dense: bool,
    /// Disorder RNG seed.
    pub seed: u64,
}

impl SykParams {
    pub fn sparse(n_majorana: usize, sparsity_k: f64, seed: u64) -> Self {
        Self {
            n_majorana,
            coupling_scale: 1.0,
            sparsity_k,
            dense: false,
            seed,
        }
    }

    pub fn dense(n_majorana: usize, seed: u64) -> Self {
        Self {
            n_majorana,
            coupling_scale: 1.0,
            sparsity_k: 0.0,
            dense: true,
            seed,
        }
    }

    /// System qubits L = N/2.
    pub fn l_qubits(&self) -> usize {
        self.n_majorana / 2
    }

    /// Inclusion probability p = kN / C(N,4); 1 for the dense model.
    pub fn inclusion_probability(&self) -> f64 {
        if self.dense {
            1.0
        } else {
            self.sparsity_k * self.n_majorana as f64 / binomial4(self.n_majorana)
        }
    }

    /// Std dev of each kept coupling: √(3!·J²/(pN³)).
    pub fn coupling_std(&self) -> f64 {
        let n = self.n_majorana as f64;
        let p = self.inclusion_probability();
        (6.0 * self.coupling_scale * self.coupling_scale / (p * n * n * n)).sqrt()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.n_majorana < 4 || self.n_majorana % 2 != 0 {
            return Err(CoreError::invalid(
                "n_majorana",
                format!("need an even N ≥ 4, got {}", self.n_majorana),
            ));
        }
        if self.n_majorana > 64 {
            return Err(CoreError::invalid(
                "n_majorana",
                "N > 64 exceeds the mask width",
            ));
        }
        if self.coupling_scale <= 0.0 {
            return Err(CoreError::invalid("coupling_scale", "J must be positive"));
        }
        if !self.dense {
            let p = self.inclusion_probability();
            if !(p > 0.0 && p <= 1.0) {
                return Err(CoreError::invalid(
                    "sparsity_k",
                    format!("p = kN/C(N,4) = {p} outside (0, 1]"),
                ));
            }
        }
        Ok(())
    }
}

fn binomial4(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 2.0) * (n - 3.0) / 24.0
}

/// One Hamiltonian term c·P with P an unsigned Hermitian Pauli string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SykTerm {
    pub coefficient: f64,
    pub string: SignedPauliString,
}

/// A single disorder realization with its Pauli-sum encoding.
#[derive(Debug, Clone)]
pub struct SparseSykInstance {
    params: SykParams,
    quadruples: Vec<[usize; 4]>,
    couplings: Vec<f64>,
    terms: Vec<SykTerm>,
    one_norm: f64,
}

impl SparseSykInstance {
    pub fn params(&self) -> &SykParams {
        &self.params
    }

    pub fn quadruples(&self) -> &[[usize; 4]] {
        &self.quadruples
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn terms(&self) -> &[SykTerm] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// μ = Σ_n |c_n|, cached at construction.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    /// The global parity string Z⊗…⊗Z on all system qubits.
    pub fn parity_string(&self) -> SignedPauliString {
        let l = self.params.l_qubits();
        SignedPauliString::from_masks(l, 0, if l == 64 { u64::MAX } else { (1 << l) - 1 })
    }

    /// Serialize params, quadruples, couplings and the derived 1-norm.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "quadruples": self.quadruples,
            "couplings": self.couplings,
            "one_norm": self.one_norm,
        })
    }

    /// Rebuild an instance from [`Self::to_json`] output; terms are
    /// re-encoded, so the round trip is bit-exact.
    pub fn from_json(value: &serde_json::Value) -> Result<Self, CoreError> {
        let params: SykParams = serde_json::from_value(value["params"].clone())
            .map_err(|e| CoreError::invalid("params", e.to_string()))?;
        let quadruples: Vec<[usize; 4]> = serde_json::from_value(value["quadruples"].clone())
            .map_err(|e| CoreError::invalid("quadruples", e.to_string()))?;
        let couplings: Vec<f64> = serde_json::from_value(value["couplings"].clone())
            .map_err(|e| CoreError::invalid("couplings", e.to_string()))?;
        if quadruples.len() != couplings.len() {
            return Err(CoreError::invalid(
                "couplings",
                "length differs from quadruple list",
            ));
        }
        Self::from_parts(params, quadruples, couplings)
    }

    /// Build an instance from an explicit quadruple/coupling list (replay
    /// and hand-crafted toy Hamiltonians).
    pub fn from_quadruples(
        params: SykParams,
        quadruples: Vec<[usize; 4]>,
        couplings: Vec<f64>,
    ) -> Result<Self, CoreError> {
        Self::from_parts(params, quadruples, couplings)
    }

    fn from_parts(
        params: SykParams,
        quadruples: Vec<[usize; 4]>,
        couplings: Vec<f64>,
    ) -> Result<Self, CoreError> {
        params.validate()?;
        let n = params.n_majorana;
        let floor = COUPLING_FLOOR * params.coupling_scale;
        let mut kept_quadruples = Vec::with_capacity(quadruples.len());
        let mut kept_couplings = Vec::with_capacity(couplings.len());
        let mut terms = Vec::with_capacity(quadruples.len());
        for (quad, &coupling) in quadruples.iter().zip(couplings.iter()) {
            if coupling.abs() < floor {
                continue;
            }
            let string = encode_majorana_quadruple(quad[0], quad[1], quad[2], quad[3], n)?;
            let (sign, unsigned) = string.fold_sign()?;
            kept_quadruples.push(*quad);
            kept_couplings.push(coupling);
            terms.push(SykTerm {
                coefficient: sign * coupling,
                string: unsigned,
            });
        }
        // Distinct quadruples encode to distinct strings, so no merge pass
        // is needed; this guards the assumption.
        debug_assert!({
            let mut seen = std::collections::HashSet::new();
            terms.iter().all(|t| seen.insert(t.string))
        });
        let one_norm = terms.iter().map(|t| t.coefficient.abs()).sum();
        Ok(Self {
            params,
            quadruples: kept_quadruples,
            couplings: kept_couplings,
            terms,
            one_norm,
        })
    }
}

/// Draw one disorder realization.
///
/// Quadruples are enumerated in lexicographic order and kept independently
/// with probability p; couplings are i.i.d. centered Gaussians with the
/// sparsity-rescaled variance. The RNG stream is derived from
/// `params.seed`, so instances are reproducible.
pub fn sample_instance(params: &SykParams) -> Result<SparseSykInstance, CoreError> {
    params.validate()?;
    let mut rng = stream_rng(params.seed, Channel::Disorder, 0);
    sample_instance_with(params, &mut rng)
}

/// As [`sample_instance`] but drawing from a caller-provided generator
/// (used when an ensemble shares one seed with per-instance streams).
pub fn sample_instance_with<R: Rng>(
    params: &SykParams,
    rng: &mut R,
) -> Result<SparseSykInstance, CoreError> {
    params.validate()?;
    let n = params.n_majorana;
    let p = params.inclusion_probability();
    let normal = Normal::new(0.0, params.coupling_std())
        .map_err(|e| CoreError::invalid("coupling_std", e.to_string()))?;

    let mut quadruples = Vec::new();
    let mut couplings = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                for l in (k + 1)..=n {
                    if params.dense || rng.random::<f64>() < p {
                        quadruples.push([i, j, k, l]);
                        couplings.push(normal.sample(rng));
                    }
                }
            }
        }
    }
    SparseSykInstance::from_parts(*params, quadruples, couplings)
}

/// Jordan-Wigner image of a single Majorana operator ψ_m, m ∈ 1..=N.
pub fn majorana_string(m: usize, n_majorana: usize) -> Result<SignedPauliString, CoreError> {
    if m == 0 || m > n_majorana {
        return Err(CoreError::invalid(
            "majorana",
            format!("index {m} outside 1..={n_majorana}"),
        ));
    }
    let l = n_majorana / 2;
    let q = (m - 1) / 2;
    let tail = (1u64 << q) - 1;
    let head = 1u64 << q;
    let (x, z) = if m % 2 == 1 {
        (head, tail) // X_q · Z_{q-1} … Z_0
    } else {
        (head, head | tail) // Y_q · Z_{q-1} … Z_0
    };
    Ok(SignedPauliString::from_masks(l, x, z))
}

/// Encode ψ_i ψ_j ψ_k ψ_l for an ordered quadruple; the result is always
/// Hermitian (phase ±1).
pub fn encode_majorana_quadruple(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    n_majorana: usize,
) -> Result<SignedPauliString, CoreError> {
    if !(i < j && j < k && k < l) {
        return Err(CoreError::invalid(
            "quadruple",
            format!("indices must be strictly increasing, got ({i},{j},{k},{l})"),
        ));
    }
    let prod = majorana_string(i, n_majorana)?
        .multiply(&majorana_string(j, n_majorana)?)?
        .multiply(&majorana_string(k, n_majorana)?)?
        .multiply(&majorana_string(l, n_majorana)?)?;
    debug_assert!(prod.is_hermitian());
    Ok(prod)
}

/// μ = Σ |c_n| over the encoded terms.
pub fn one_norm(instance: &SparseSykInstance) -> f64 {
    instance.one_norm()
}

/// The closed-form scaling of the disorder-averaged 1-norm,
/// √(6p)·J/24 · N!/(N^{3/2}·(N−4)!).
///
/// This replaces E|J| by the standard deviation of J, so it exceeds the
/// true mean by √(π/2); see [`one_norm_ensemble_mean`] for the value the
/// Monte-Carlo average converges to.
pub fn one_norm_scaling_estimate(params: &SykParams) -> f64 {
    let n = params.n_majorana as f64;
    let p = params.inclusion_probability();
    let falling = n * (n - 1.0) * (n - 2.0) * (n - 3.0);
    (6.0 * p).sqrt() * params.coupling_scale / 24.0 * falling / n.powf(1.5)
}

/// True disorder mean of μ: E[#terms]·E|J| = pC(N,4)·σ·√(2/π).
pub fn one_norm_ensemble_mean(params: &SykParams) -> f64 {
    one_norm_scaling_estimate(params) * (2.0 / std::f64::consts::PI).sqrt()
}

/// Dense matrix of the encoded Hamiltonian (capability-limited, tests and
/// oracles only).
pub fn dense_matrix(instance: &SparseSykInstance) -> Result<Vec<Vec<Complex64>>, CoreError> {
    let l = instance.params().l_qubits();
    if l > 12 {
        return Err(CoreError::Capability(format!(
            "dense matrix at L = {l} > 12"
        )));
    }
    let dim = 1usize << l;
    let mut h = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for term in instance.terms() {
        let x = term.string.x_mask() as usize;
        let z = term.string.z_mask();
        let sign = term.string.hermitian_sign()?;
        let y = term.string.y_count();
        let c0 = Complex64::new(0.0, 1.0).powu(y) * sign * term.coefficient;
        for (col, row_vec) in (0..dim).map(|c| (c, c ^ x)) {
            let par = ((col as u64 & z).count_ones() % 2) as i32;
            let val = if par == 0 { c0 } else { -c0 };
            h[row_vec][col] += val;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{mat_allclose, mat_identity, mat_mul, mat_of_string, scale};
    use approx::assert_abs_diff_eq;

    #[test]
    fn inclusion_probability_matches_setup_formula() {
        let params = SykParams::sparse(24, 2.3, 0);
        // p = kN/C(N,4) = 55.2/10626
        assert_abs_diff_eq!(
            params.inclusion_probability(),
            55.2 / 10626.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            params.inclusion_probability() * 10626.0,
            2.3 * 24.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn dense_n4_has_single_quadruple_with_expected_variance() {
        let params = SykParams::dense(4, 3);
        let instance = sample_instance(&params).unwrap();
        assert_eq!(instance.quadruples(), &[[1, 2, 3, 4]]);
        // Var[J_1234] = 3!·J²/N³ = 6/64
        assert_abs_diff_eq!(params.coupling_std().powi(2), 6.0 / 64.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SykParams::sparse(7, 1.0, 0).validate().is_err());
        assert!(SykParams::sparse(2, 1.0, 0).validate().is_err());
        // p > 1: k large enough that kN exceeds C(N,4)
        assert!(SykParams::sparse(8, 10.0, 0).validate().is_err());
        assert!(sample_instance(&SykParams::sparse(9, 1.0, 0)).is_err());
    }

    #[test]
    fn quadruple_1234_is_weight_two_on_first_two_qubits() {
        // ψ₁ψ₂ψ₃ψ₄ = (X₀·Y₀)(X₁Z₀·Y₁Z₀) = (iZ₀)(iZ₁) = −Z₀Z₁.
        let s = encode_majorana_quadruple(1, 2, 3, 4, 8).unwrap();
        assert_eq!(s.weight(), 2);
        assert_eq!(s.site(0), 'Z');
        assert_eq!(s.site(1), 'Z');
        assert_eq!(s.site(2), 'I');
        assert_eq!(s.site(3), 'I');
        assert_eq!(s.hermitian_sign().unwrap(), -1.0);
        // Matrix oracle at L = 2 over the first four Majoranas.
        let m = [1usize, 2, 3, 4].map(|m| mat_of_string(&majorana_string(m, 4).unwrap()));
        let prod = mat_mul(&mat_mul(&m[0], &m[1]), &mat_mul(&m[2], &m[3]));
        let enc = mat_of_string(&encode_majorana_quadruple(1, 2, 3, 4, 4).unwrap());
        assert!(mat_allclose(&prod, &enc, 1e-14));
    }

    #[test]
    fn majoranas_anticommute_by_matrix_oracle() {
        // {ψ_a, ψ_b} = 2δ_ab·I for all a, b ≤ 8 at L = 4.
        let n = 8;
        let dim = 1 << (n / 2);
        for a in 1..=n {
            for b in 1..=n {
                let ma = mat_of_string(&majorana_string(a, n).unwrap());
                let mb = mat_of_string(&majorana_string(b, n).unwrap());
                let mut anti = mat_mul(&ma, &mb);
                let ba = mat_mul(&mb, &ma);
                crate::testutil::mat_add_scaled(&mut anti, &ba, Complex64::new(1.0, 0.0));
                let expected = if a == b {
                    scale(&mat_identity(dim), Complex64::new(2.0, 0.0))
                } else {
                    scale(&mat_identity(dim), Complex64::new(0.0, 0.0))
                };
                assert!(mat_allclose(&anti, &expected, 1e-13), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn quadruples_are_out_of_range_checked() {
        assert!(encode_majorana_quadruple(1, 2, 3, 9, 8).is_err());
        assert!(encode_majorana_quadruple(2, 1, 3, 4, 8).is_err());
        assert!(encode_majorana_quadruple(1, 1, 3, 4, 8).is_err());
        assert!(majorana_string(0, 8).is_err());
    }

    #[test]
    fn every_term_commutes_with_global_parity() {
        let params = SykParams::sparse(16, 2.3, 41);
        let instance = sample_instance(&params).unwrap();
        let parity = instance.parity_string();
        for term in instance.terms() {
            assert!(term.string.commutes(&parity).unwrap());
            assert!(term.string.is_hermitian());
        }
    }

    #[test]
    fn one_norm_edge_cases() {
        let params = SykParams::sparse(8, 2.3, 5);
        let empty = SparseSykInstance::from_parts(params, vec![], vec![]).unwrap();
        assert_eq!(one_norm(&empty), 0.0);
        let single =
            SparseSykInstance::from_parts(params, vec![[1, 2, 3, 4]], vec![-0.7]).unwrap();
        assert_abs_diff_eq!(one_norm(&single), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn one_norm_formula_value_and_monte_carlo_mean() {
        let params = SykParams::sparse(24, 2.3, 0);
        // Closed form evaluates to 15.9556 J; the true mean carries the
        // half-normal factor √(2/π) on top of it.
        assert_abs_diff_eq!(
            one_norm_scaling_estimate(&params),
            15.955_602_464_338,
            epsilon = 1e-9
        );
        let expected = one_norm_ensemble_mean(&params);
        assert_abs_diff_eq!(expected, 12.730_728_864_604, epsilon = 1e-9);

        let n_samples = 1200;
        let mut mus = Vec::with_capacity(n_samples);
        for idx in 0..n_samples {
            let mut rng = stream_rng(900, Channel::Disorder, idx as u64);
            let inst = sample_instance_with(&params, &mut rng).unwrap();
            mus.push(inst.one_norm());
        }
        let mean: f64 = mus.iter().sum::<f64>() / n_samples as f64;
        let var: f64 =
            mus.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n_samples - 1) as f64;
        let se = (var / n_samples as f64).sqrt();
        assert!(
            (mean - expected).abs() < 5.0 * se,
            "MC mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn coupling_statistics_match_rescaled_variance() {
        let params = SykParams::sparse(12, 2.3, 77);
        let target_var = params.coupling_std().powi(2);
        let mut all = Vec::new();
        let mut counts = Vec::new();
        for idx in 0..1000u64 {
            let mut rng = stream_rng(901, Channel::Disorder, idx);
            let inst = sample_instance_with(&params, &mut rng).unwrap();
            counts.push(inst.quadruples().len() as f64);
            all.extend_from_slice(inst.couplings());
        }
        assert!(all.len() > 10_000, "need ≥ 10⁴ coupling draws");
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let var = all.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
        let se_mean = (var / n).sqrt();
        // Var of the sample variance of a Gaussian ≈ 2σ⁴/n.
        let se_var = (2.0 * target_var * target_var / n).sqrt();
        assert!(mean.abs() < 5.0 * se_mean, "mean {mean} vs 0 (se {se_mean})");
        assert!(
            (var - target_var).abs() < 5.0 * se_var,
            "var {var} vs {target_var} (se {se_var})"
        );

        // E[#quadruples] = kN.
        let kn = 2.3 * 12.0;
        let cmean = counts.iter().sum::<f64>() / counts.len() as f64;
        let cvar = counts.iter().map(|c| (c - cmean) * (c - cmean)).sum::<f64>()
            / (counts.len() - 1) as f64;
        let cse = (cvar / counts.len() as f64).sqrt();
        assert!(
            (cmean - kn).abs() < 5.0 * cse,
            "count mean {cmean} vs {kn} (se {cse})"
        );
    }

    #[test]
    fn dense_hamiltonian_is_hermitian_traceless_and_parity_symmetric() {
        let params = SykParams::sparse(12, 2.3, 8);
        let instance = sample_instance(&params).unwrap();
        let h = dense_matrix(&instance).unwrap();
        let dim = h.len();
        let mut trace = Complex64::new(0.0, 0.0);
        for r in 0..dim {
            trace += h[r][r];
            for c in 0..dim {
                assert!((h[r][c] - h[c][r].conj()).norm() < 1e-12);
            }
        }
        assert!(trace.norm() < 1e-10);
        // [H, Z^{⊗L}] = 0 as matrices.
        let parity = mat_of_string(&instance.parity_string());
        let hp = mat_mul(&h, &parity);
        let ph = mat_mul(&parity, &h);
        assert!(mat_allclose(&hp, &ph, 1e-12));
        // Cross-check the mask-based dense builder against the brute-force
        // per-term matrix construction.
        let brute = crate::testutil::dense_hamiltonian_matrix(&instance);
        assert!(mat_allclose(&h, &brute, 1e-12));
    }

    #[test]
    fn serialization_round_trip_is_bit_exact() {
        let params = SykParams::sparse(16, 2.3, 99);
        let instance = sample_instance(&params).unwrap();
        let json = instance.to_json();
        let restored = SparseSykInstance::from_json(&json).unwrap();
        assert_eq!(instance.quadruples(), restored.quadruples());
        assert_eq!(instance.couplings(), restored.couplings());
        assert_eq!(instance.one_norm(), restored.one_norm());
        for (a, b) in instance.terms().iter().zip(restored.terms()) {
            assert_eq!(a.coefficient, b.coefficient);
            assert_eq!(a.string, b.string);
        }
    }
}

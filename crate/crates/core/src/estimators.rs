//! From shot records to mitigated estimates.
//!
//! Echo-verified observables are diagonal in the measured basis, so each
//! shot contributes `(−1)^{ancilla} · D(system bits)`. Circuits are the
//! i.i.d. unit: shots within a circuit share the sampled unitary and are
//! correlated, so standard errors come from the spread of circuit-level
//! means, and the attenuation rescaling λ⁻¹ happens per circuit.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::state::ShotOutcome;

/// Diagonal system observable measured together with X on the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EchoObservable {
    /// 𝒪 = I: the system outcome is ignored.
    IdentityOnSystem,
    /// 𝒪 = |0…0⟩⟨0…0|: count zero unless all system bits are 0.
    ProjectZero,
    /// 𝒪 = |0⟩⟨0| plus all Hamming-weight-1 projectors: tolerates one
    /// bit flip.
    ProjectZeroMitigated,
}

impl EchoObservable {
    pub const ALL: [EchoObservable; 3] = [
        EchoObservable::IdentityOnSystem,
        EchoObservable::ProjectZero,
        EchoObservable::ProjectZeroMitigated,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            EchoObservable::IdentityOnSystem => "identity",
            EchoObservable::ProjectZero => "project_zero",
            EchoObservable::ProjectZeroMitigated => "project_zero_mitigated",
        }
    }

    /// Diagonal value on a system bitstring.
    pub fn diagonal(&self, system_bits: u64) -> f64 {
        match self {
            EchoObservable::IdentityOnSystem => 1.0,
            EchoObservable::ProjectZero => {
                if system_bits == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            EchoObservable::ProjectZeroMitigated => {
                if system_bits.count_ones() <= 1 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The per-shot estimator value (−1)^{ancilla}·D(s).
    pub fn shot_value(&self, shot: &ShotOutcome) -> f64 {
        let sign = if shot.ancilla_bit == 0 { 1.0 } else { -1.0 };
        sign * self.diagonal(shot.system_bits)
    }
}

/// One persisted estimate with its sampling metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub observable: EchoObservable,
    /// λ⁻¹-rescaled mean over circuit-level means.
    pub y: f64,
    /// Standard error over circuits; `None` with fewer than two circuits.
    pub sigma: Option<f64>,
    pub lambda: f64,
    pub circuits: usize,
    pub shots_per_circuit: usize,
    pub gate_angle: f64,
    pub alpha: f64,
    pub time: f64,
}

/// Mean and standard error over per-circuit values that are already on the
/// final scale (any per-circuit λ⁻¹ applied by the caller).
pub fn aggregate_circuit_means(values: &[f64]) -> Result<(f64, Option<f64>), CoreError> {
    if values.is_empty() {
        return Err(CoreError::Estimation("no circuits".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Ok((mean, None));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, Some((var / n).sqrt())))
}

/// Estimate λ⁻¹·E[(−1)^a·D(s)] from shots grouped by circuit, one λ for
/// the whole group.
pub fn estimate(
    shots_by_circuit: &[Vec<ShotOutcome>],
    observable: EchoObservable,
    lambda: f64,
) -> Result<(f64, Option<f64>), CoreError> {
    if shots_by_circuit.is_empty() {
        return Err(CoreError::Estimation("no circuits".into()));
    }
    if lambda <= 0.0 {
        return Err(CoreError::invalid("lambda", "attenuation must be positive"));
    }
    let mut means = Vec::with_capacity(shots_by_circuit.len());
    for shots in shots_by_circuit {
        if shots.is_empty() {
            return Err(CoreError::Estimation("circuit with no shots".into()));
        }
        let m: f64 =
            shots.iter().map(|s| observable.shot_value(s)).sum::<f64>() / shots.len() as f64;
        means.push(m / lambda);
    }
    aggregate_circuit_means(&means)
}

/// Linear large-gate-angle extrapolation from the pair (τ₀, ατ₀):
/// y = (y₀ − α·y_α)/(1 − α), σ = √(σ₀² + α²σ_α²)/(1 − α).
pub fn lgae_linear(
    y0: f64,
    sigma0: f64,
    y_alpha: f64,
    sigma_alpha: f64,
    alpha: f64,
) -> Result<(f64, f64), CoreError> {
    check_alpha(alpha)?;
    let y = (y0 - alpha * y_alpha) / (1.0 - alpha);
    let sigma = (sigma0 * sigma0 + alpha * alpha * sigma_alpha * sigma_alpha).sqrt() / (1.0 - alpha);
    Ok((y, sigma))
}

/// Exponential variant: y = exp[(ln y₀ − α ln y_α)/(1 − α)] with Gaussian
/// error propagation. Non-positive inputs are a domain error, never
/// clipped.
pub fn lgae_exponential(
    y0: f64,
    sigma0: f64,
    y_alpha: f64,
    sigma_alpha: f64,
    alpha: f64,
) -> Result<(f64, f64), CoreError> {
    check_alpha(alpha)?;
    if y0 <= 0.0 || y_alpha <= 0.0 {
        return Err(CoreError::Domain(format!(
            "exponential extrapolation needs positive estimates, got y0 = {y0}, y_alpha = {y_alpha}"
        )));
    }
    let y = ((y0.ln() - alpha * y_alpha.ln()) / (1.0 - alpha)).exp();
    let rel = (alpha * alpha * sigma_alpha * sigma_alpha / (y_alpha * y_alpha)
        + sigma0 * sigma0 / (y0 * y0))
        .sqrt();
    Ok((y, y / (1.0 - alpha) * rel))
}

/// Optimal split of a fixed shot budget between the two angles given the
/// per-unit-noise levels s₀, s_α when σ₀² = s₀²/x and σ_α² = s_α²/(1−x):
/// x = s₀/(s₀ + α·s_α), with the minimum σ = (s₀ + α·s_α)/(1 − α)
/// (total shots normalized to one).
pub fn optimal_shot_split(s0: f64, s_alpha: f64, alpha: f64) -> Result<(f64, f64), CoreError> {
    check_alpha(alpha)?;
    if s0 <= 0.0 || s_alpha <= 0.0 {
        return Err(CoreError::invalid("shot_noise", "s₀ and s_α must be positive"));
    }
    let x = s0 / (s0 + alpha * s_alpha);
    let sigma = (s0 + alpha * s_alpha) / (1.0 - alpha);
    Ok((x, sigma))
}

fn check_alpha(alpha: f64) -> Result<(), CoreError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CoreError::invalid("alpha", format!("{alpha} outside (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn shot(anc: u8, sys: u64) -> ShotOutcome {
        ShotOutcome {
            ancilla_bit: anc,
            system_bits: sys,
        }
    }

    #[test]
    fn shot_values_follow_the_sign_and_projection_rules() {
        // All-zero outcome with ancilla 0 scores +1 for every observable.
        for obs in EchoObservable::ALL {
            assert_eq!(obs.shot_value(&shot(0, 0)), 1.0);
            assert_eq!(obs.shot_value(&shot(1, 0)), -1.0);
        }
        // One flipped system bit: 0 for the strict projector, +1 for the
        // mitigated one and the identity.
        let s = shot(0, 0b0100);
        assert_eq!(EchoObservable::ProjectZero.shot_value(&s), 0.0);
        assert_eq!(EchoObservable::ProjectZeroMitigated.shot_value(&s), 1.0);
        assert_eq!(EchoObservable::IdentityOnSystem.shot_value(&s), 1.0);
        // Two flipped bits: only the identity keeps the shot.
        let s2 = shot(0, 0b0101);
        assert_eq!(EchoObservable::ProjectZeroMitigated.shot_value(&s2), 0.0);
        assert_eq!(EchoObservable::IdentityOnSystem.shot_value(&s2), 1.0);
    }

    #[test]
    fn estimate_handles_edge_cases() {
        let all_good = vec![vec![shot(0, 0); 4]; 3];
        let (y, sigma) = estimate(&all_good, EchoObservable::ProjectZero, 1.0).unwrap();
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma.unwrap(), 0.0, epsilon = 1e-15);

        assert!(estimate(&[], EchoObservable::ProjectZero, 1.0).is_err());
        let single = vec![vec![shot(0, 0); 4]];
        let (_, sigma) = estimate(&single, EchoObservable::ProjectZero, 1.0).unwrap();
        assert!(sigma.is_none(), "single circuit leaves σ undefined");

        // λ rescaling.
        let (y, _) = estimate(&all_good, EchoObservable::IdentityOnSystem, 0.5).unwrap();
        assert_abs_diff_eq!(y, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn estimate_is_invariant_under_circuit_relabeling() {
        let groups = vec![
            vec![shot(0, 0), shot(1, 0)],
            vec![shot(0, 2), shot(0, 0)],
            vec![shot(1, 1), shot(0, 0), shot(0, 3)],
        ];
        let mut permuted = groups.clone();
        permuted.rotate_left(2);
        for obs in EchoObservable::ALL {
            let a = estimate(&groups, obs, 0.8).unwrap();
            let b = estimate(&permuted, obs, 0.8).unwrap();
            assert_abs_diff_eq!(a.0, b.0, epsilon = 1e-15);
            assert_abs_diff_eq!(a.1.unwrap(), b.1.unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_lgae_examples() {
        // No noise dependence: the extrapolation is a fixed point.
        let (y, _) = lgae_linear(0.37, 0.01, 0.37, 0.02, 0.25).unwrap();
        assert_abs_diff_eq!(y, 0.37, epsilon = 1e-15);

        // α = 1/3, y₀ = 0.5, y_α = 0.2 → (0.5 − 0.2/3)/(2/3) = 0.65.
        let (y, sigma) = lgae_linear(0.5, 0.01, 0.2, 0.02, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(y, 0.65, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sigma,
            (0.01f64.powi(2) + (0.02f64 / 3.0).powi(2)).sqrt() * 1.5,
            epsilon = 1e-12
        );

        assert!(lgae_linear(0.5, 0.0, 0.2, 0.0, 1.5).is_err());
        assert!(lgae_linear(0.5, 0.0, 0.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn linear_lgae_cancels_exactly_linear_bias() {
        // y(N_g) = a + b·N_g with N_g ∝ 1/τ: τ₀ gives N_g, ατ₀ gives N_g/α.
        let (a, b) = (0.42, -0.003);
        let alpha = 1.0 / 3.0;
        let n_g = 50.0;
        let y0 = a + b * n_g;
        let y_deep = a + b * n_g / alpha;
        let (y, _) = lgae_linear(y0, 0.0, y_deep, 0.0, alpha).unwrap();
        assert_abs_diff_eq!(y, a, epsilon = 1e-12);
    }

    #[test]
    fn exponential_lgae_cancels_exactly_exponential_bias() {
        let (a, b): (f64, f64) = (0.61, -0.004);
        let alpha = 0.4;
        let n_g = 80.0;
        let y0 = a * (b * n_g).exp();
        let y_deep = a * (b * n_g / alpha).exp();
        let (y, _) = lgae_exponential(y0, 0.0, y_deep, 0.0, alpha).unwrap();
        assert_abs_diff_eq!(y, a, epsilon = 1e-12);

        let (same, _) = lgae_exponential(0.3, 0.0, 0.3, 0.0, alpha).unwrap();
        assert_abs_diff_eq!(same, 0.3, epsilon = 1e-14);

        assert!(lgae_exponential(-0.1, 0.0, 0.3, 0.0, alpha).is_err());
        assert!(lgae_exponential(0.1, 0.0, 0.0, 0.0, alpha).is_err());
    }

    #[test]
    fn exponential_lgae_variance_blows_up_near_zero() {
        let (_, sigma) = lgae_exponential(0.5, 0.01, 1e-4, 0.01, 1.0 / 3.0).unwrap();
        assert!(sigma > 10.0, "near-zero deep estimate must flag low confidence");
    }

    #[test]
    fn shot_split_examples_and_numeric_minimum() {
        // s₀ = s_α = s, α = 1/3 → x = 3/4 and σ = 2s.
        let (x, sigma) = optimal_shot_split(1.0, 1.0, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(x, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(sigma, 2.0, epsilon = 1e-15);

        // α → 0 pushes all shots to the shallow circuit.
        let (x, _) = optimal_shot_split(1.0, 1.0, 1e-9).unwrap();
        assert!(x > 1.0 - 1e-8);

        // Golden-section check of the 1-D objective
        // σ(x) = √(s₀²/x + α²s_α²/(1−x))/(1−α).
        let (s0, s_alpha, alpha) = (0.7, 1.3, 0.28);
        let objective = |x: f64| {
            (s0 * s0 / x + alpha * alpha * s_alpha * s_alpha / (1.0 - x)).sqrt() / (1.0 - alpha)
        };
        let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if objective(m1) < objective(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let x_numeric = 0.5 * (lo + hi);
        let (x, sigma) = optimal_shot_split(s0, s_alpha, alpha).unwrap();
        assert_abs_diff_eq!(x, x_numeric, epsilon = 1e-6);
        assert_abs_diff_eq!(sigma, objective(x_numeric), epsilon = 1e-6);
    }
}

//! The experiment configuration file.
//!
//! A run is described by a single TOML document. Unknown keys are rejected
//! everywhere: a silent typo in a study file corrupts an experiment, so the
//! schema is closed and versioned. Sections are optional at parse time;
//! each experiment kind validates that the sections it needs are present
//! and reports the offending path.

use serde::{Deserialize, Serialize};
use syklab_core::state::NoiseSpec;
use syklab_core::syk::SykParams;
use syklab_core::tetris::{optimal_angle, scaled_angle};

use crate::ExpError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Registry name of the experiment kind.
    pub kind: String,
    /// Master seed; all RNG streams derive from it.
    pub seed: u64,
    #[serde(default)]
    pub syk: Option<SykSection>,
    #[serde(default)]
    pub times: TimesSection,
    #[serde(default)]
    pub angle: AngleSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub study: StudySection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExpError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExpError::Validation(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ExpError::validation(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn syk(&self) -> Result<&SykSection, ExpError> {
        self.syk
            .as_ref()
            .ok_or_else(|| ExpError::validation("syk", "section required for this experiment"))
    }

    /// SYK parameters with the disorder seed derived from the master seed.
    pub fn syk_params(&self, seed: u64) -> Result<SykParams, ExpError> {
        let s = self.syk()?;
        let params = SykParams {
            n_majorana: s.n_majorana,
            coupling_scale: s.coupling_scale,
            sparsity_k: s.sparsity_k,
            dense: s.dense,
            seed,
        };
        params
            .validate()
            .map_err(|e| ExpError::validation("syk", e))?;
        Ok(params)
    }

    pub fn require_times(&self) -> Result<&[f64], ExpError> {
        if self.times.grid.is_empty() {
            return Err(ExpError::validation("times.grid", "must not be empty"));
        }
        if self.times.grid.iter().any(|&t| t <= 0.0) {
            return Err(ExpError::validation("times.grid", "times must be positive"));
        }
        Ok(&self.times.grid)
    }

    pub fn single_time(&self) -> Result<f64, ExpError> {
        let grid = self.require_times()?;
        if grid.len() != 1 {
            return Err(ExpError::validation(
                "times.grid",
                "exactly one time point expected for this experiment",
            ));
        }
        Ok(grid[0])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SykSection {
    pub n_majorana: usize,
    #[serde(default = "default_coupling")]
    pub coupling_scale: f64,
    pub sparsity_k: f64,
    #[serde(default)]
    pub dense: bool,
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesSection {
    /// Physical times in units of 1/J.
    #[serde(default)]
    pub grid: Vec<f64>,
}

/// Gate-angle policy per circuit family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSection {
    /// "optimal" | "shallow" | "scaled" | "fixed".
    #[serde(default = "default_policy")]
    pub policy: String,
    /// Multiplier c in τ₀ = c/(tμ) for the shallow family.
    #[serde(default = "default_tau0_factor")]
    pub tau0_factor: f64,
    /// Deep-circuit rescaling τ_α = α·τ₀.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Explicit angle for the "fixed" policy.
    #[serde(default)]
    pub tau: Option<f64>,
}

fn default_policy() -> String {
    "shallow".to_owned()
}

fn default_tau0_factor() -> f64 {
    1.5
}

fn default_alpha() -> f64 {
    1.0 / 3.0
}

impl Default for AngleSection {
    fn default() -> Self {
        Self {
            policy: default_policy(),
            tau0_factor: default_tau0_factor(),
            alpha: default_alpha(),
            tau: None,
        }
    }
}

impl AngleSection {
    /// Resolve the angle for (t, μ).
    pub fn resolve(&self, time: f64, one_norm: f64) -> Result<f64, ExpError> {
        match self.policy.as_str() {
            "optimal" => Ok(optimal_angle(time, one_norm)),
            "shallow" => Ok(scaled_angle(self.tau0_factor, time, one_norm)),
            "scaled" => Ok(scaled_angle(self.tau0_factor * self.alpha, time, one_norm)),
            "fixed" => self
                .tau
                .ok_or_else(|| ExpError::validation("angle.tau", "required for fixed policy")),
            other => Err(ExpError::validation(
                "angle.policy",
                format!("unknown policy {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// "none" | "per_gate" | "global".
    #[serde(default = "default_noise_mode")]
    pub mode: String,
    #[serde(default)]
    pub p_dep: f64,
    #[serde(default)]
    pub rate: f64,
}

fn default_noise_mode() -> String {
    "none".to_owned()
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            mode: default_noise_mode(),
            p_dep: 0.0,
            rate: 0.0,
        }
    }
}

impl NoiseSection {
    pub fn to_spec(&self) -> Result<NoiseSpec, ExpError> {
        let spec = match self.mode.as_str() {
            "none" => NoiseSpec::None,
            "per_gate" => NoiseSpec::PerGate { p_dep: self.p_dep },
            "global" => NoiseSpec::Global { rate: self.rate },
            other => {
                return Err(ExpError::validation(
                    "noise.mode",
                    format!("unknown mode {other:?}"),
                ))
            }
        };
        spec.validate().map_err(|e| ExpError::validation("noise", e))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default)]
    pub circuits: usize,
    #[serde(default = "default_one")]
    pub shots_per_circuit: usize,
    /// Instances in the fixed disorder ensemble.
    #[serde(default = "default_one")]
    pub disorder_ensemble: usize,
    /// Resample a fresh instance per circuit (joint sampling).
    #[serde(default)]
    pub joint_resampling: bool,
}

fn default_one() -> usize {
    1
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            circuits: 0,
            shots_per_circuit: 1,
            disorder_ensemble: 1,
            joint_resampling: false,
        }
    }
}

/// Kind-specific knobs; each experiment validates what it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    /// Angle rescalings α for sweeps.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Shots-per-circuit grid for the variance study.
    #[serde(default)]
    pub shots_grid: Option<Vec<usize>>,
    /// Fixed total shot budget per grid point.
    #[serde(default)]
    pub total_shots: Option<usize>,
    /// System sizes for the crossover study.
    #[serde(default)]
    pub n_majorana_list: Option<Vec<usize>>,
    /// Trotter step counts.
    #[serde(default)]
    pub trotter_steps: Option<Vec<usize>>,
    /// Two-qubit depolarizing rates for the mirror sweep.
    #[serde(default)]
    pub p_dep_grid: Option<Vec<f64>>,
    /// Global noise rates for the overlay (mutually exclusive with `beta`).
    #[serde(default)]
    pub q_values: Option<Vec<f64>>,
    /// Rate-vs-time proportionality for the overlay: q = β·t (shallow).
    #[serde(default)]
    pub beta: Option<f64>,
    /// Trajectories per check point.
    #[serde(default)]
    pub trajectories: Option<usize>,
    /// Uniform model-grid resolution.
    #[serde(default)]
    pub grid_points: Option<usize>,
    /// Fit β to the shallow projector data and predict the other settings.
    #[serde(default)]
    pub fit_beta: Option<bool>,
    /// Qubit counts for the resource calculator.
    #[serde(default)]
    pub l_qubits_list: Option<Vec<usize>>,
    /// Sparsity for the resource calculator.
    #[serde(default)]
    pub sparsity_k: Option<f64>,
    /// Override Jt for the resource calculator (default: scrambling preset).
    #[serde(default)]
    pub jt: Option<f64>,
    /// Seconds of wall clock per unit circuit depth, in milliseconds.
    #[serde(default)]
    pub depth_time_ms: Option<f64>,
    /// Report gate-parallelized runtimes.
    #[serde(default)]
    pub parallel: Option<bool>,
    /// Compute exact-oracle reference columns.
    #[serde(default)]
    pub exact_reference: Option<bool>,
    /// Trajectory pairs per instance for the mirror benchmarks.
    #[serde(default)]
    pub samples: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_minimal_document() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            schema_version = 1
            kind = "loschmidt_scan"
            seed = 7
            [syk]
            n_majorana = 8
            sparsity_k = 2.3
            [times]
            grid = [0.5]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kind, "loschmidt_scan");
        assert_eq!(cfg.syk().unwrap().n_majorana, 8);
        assert_eq!(cfg.single_time().unwrap(), 0.5);
    }

    #[test]
    fn rejects_unknown_keys_and_wrong_schema() {
        let bad = ExperimentConfig::from_toml(
            r#"
            schema_version = 1
            kind = "loschmidt_scan"
            seed = 7
            typo_key = 3
            "#,
        );
        assert!(bad.is_err());

        let nested = ExperimentConfig::from_toml(
            r#"
            schema_version = 1
            kind = "loschmidt_scan"
            seed = 7
            [syk]
            n_majorana = 8
            sparsity_k = 2.3
            sparsityk = 2.3
            "#,
        );
        assert!(nested.is_err());

        let old = ExperimentConfig::from_toml(
            r#"
            schema_version = 99
            kind = "x"
            seed = 1
            "#,
        );
        assert!(matches!(old, Err(ExpError::Validation(_))));
    }

    #[test]
    fn angle_policies_resolve() {
        let mut angle = AngleSection::default();
        assert!((angle.resolve(0.5, 6.0).unwrap() - 0.5).abs() < 1e-12);
        angle.policy = "scaled".into();
        angle.alpha = 1.0 / 3.0;
        assert!((angle.resolve(0.5, 6.0).unwrap() - 0.5 / 3.0).abs() < 1e-12);
        angle.policy = "fixed".into();
        assert!(angle.resolve(0.5, 6.0).is_err());
        angle.tau = Some(0.3);
        assert_eq!(angle.resolve(0.5, 6.0).unwrap(), 0.3);
        angle.policy = "bogus".into();
        assert!(angle.resolve(0.5, 6.0).is_err());
    }
}

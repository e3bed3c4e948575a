//! Analytic noise model vs trajectory simulation.
//!
//! Tabulates g(t) and h(t) for a disorder ensemble, solves the Volterra
//! model, and overlays global-depolarizing trajectory estimates at the
//! check times. Two rate policies:
//!
//! * `study.q_values` — fixed rates, one setting per value;
//! * `study.beta` — per-experiment rate q = β·t on the shallow family and
//!   q = β·t/α on the deep family, the circuit-depth-proportional policy.
//!   With `study.fit_beta`, β is refit from the shallow projector data and
//!   the other three settings are predicted from it.
//!
//! All values are λ⁻¹-rescaled, so model and data columns share a scale.

use serde::{Deserialize, Serialize};
use serde_json::json;
use syklab_core::noise_theory::{
    fit_beta, rescaled_model_value, AmplitudeTable, BetaFitPoint, TraceObservable,
};
use syklab_core::rng::{stream_rng, Channel};
use syklab_core::state::{tabulate_amplitudes, Control, NoiseSpec, StateVector};
use syklab_core::tetris::{run_conditional, sample_circuit, scaled_angle, TetrisConfig};

use crate::config::ExperimentConfig;
use crate::experiments::{from_value, fmt_f64, mean_se, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct NoiseModelOverlay;

const HEADER: &[&str] = &[
    "row_type",
    "setting",
    "observable",
    "q",
    "time",
    "value",
    "sigma",
    "mean_tq",
    "errors_per_tq",
    "seed",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrajValue {
    x_identity: f64,
    x_project_zero: f64,
    tq: u64,
}

#[derive(Debug, Clone)]
enum RatePolicy {
    Fixed(Vec<f64>),
    Beta { beta: f64, alpha: f64 },
}

impl RatePolicy {
    fn settings(&self) -> Vec<String> {
        match self {
            RatePolicy::Fixed(qs) => qs.iter().map(|q| format!("q={q}")).collect(),
            RatePolicy::Beta { .. } => vec!["shallow".into(), "deep".into()],
        }
    }

    fn rate(&self, setting: usize, time: f64) -> f64 {
        match self {
            RatePolicy::Fixed(qs) => qs[setting],
            RatePolicy::Beta { beta, alpha } => {
                let base = beta * time;
                if setting == 0 {
                    base
                } else {
                    base / alpha
                }
            }
        }
    }

    /// Angle factor relative to τ₀ for the setting.
    fn angle_scale(&self, setting: usize) -> f64 {
        match self {
            RatePolicy::Fixed(_) => 1.0,
            RatePolicy::Beta { alpha, .. } => {
                if setting == 0 {
                    1.0
                } else {
                    *alpha
                }
            }
        }
    }
}

fn policy(cfg: &ExperimentConfig) -> Result<RatePolicy, ExpError> {
    match (&cfg.study.q_values, cfg.study.beta) {
        (Some(qs), None) => {
            if qs.is_empty() || qs.iter().any(|&q| q < 0.0) {
                return Err(ExpError::validation("study.q_values", "need non-negative rates"));
            }
            Ok(RatePolicy::Fixed(qs.clone()))
        }
        (None, Some(beta)) => {
            if beta < 0.0 {
                return Err(ExpError::validation("study.beta", "must be non-negative"));
            }
            if !(cfg.angle.alpha > 0.0 && cfg.angle.alpha < 1.0) {
                return Err(ExpError::validation("angle.alpha", "need 0 < α < 1"));
            }
            Ok(RatePolicy::Beta {
                beta,
                alpha: cfg.angle.alpha,
            })
        }
        (Some(_), Some(_)) => Err(ExpError::validation(
            "study",
            "q_values and beta are mutually exclusive",
        )),
        (None, None) => Err(ExpError::validation(
            "study",
            "one of q_values or beta is required",
        )),
    }
}

fn grid_layout(cfg: &ExperimentConfig) -> Result<(Vec<f64>, Vec<usize>), ExpError> {
    let times = cfg.require_times()?;
    let n = cfg.study.grid_points.unwrap_or(129);
    if n < 9 {
        return Err(ExpError::validation("study.grid_points", "need ≥ 9"));
    }
    let t_max = times.iter().fold(0.0f64, |a, &b| a.max(b));
    let step = t_max / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| step * i as f64).collect();
    let mut indices = Vec::with_capacity(times.len());
    for &t in times {
        let idx = (t / step).round() as usize;
        if idx >= n || (t - grid[idx]).abs() > 1e-9 * t.max(1.0) {
            return Err(ExpError::validation(
                "times.grid",
                format!("t = {t} does not land on the {n}-point model grid; adjust study.grid_points"),
            ));
        }
        indices.push(idx);
    }
    Ok((grid, indices))
}

impl Experiment for NoiseModelOverlay {
    fn kind(&self) -> &'static str {
        "noise_model_overlay"
    }

    fn summary(&self) -> &'static str {
        "Volterra noise model curves overlaid with global-noise trajectories"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        grid_layout(cfg)?;
        policy(cfg)?;
        if cfg.study.trajectories.unwrap_or(1000) < 2 {
            return Err(ExpError::validation("study.trajectories", "need ≥ 2"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let params = cfg.syk_params(ctx.seed)?;
        let (grid, check_indices) = grid_layout(cfg)?;
        let times = cfg.require_times()?.to_vec();
        let rate_policy = policy(cfg)?;
        let settings = rate_policy.settings();
        let trajectories = cfg.study.trajectories.unwrap_or(1000);
        let ensemble = cfg.sampling.disorder_ensemble.max(1);
        let tau0_factor = cfg.angle.tau0_factor;
        let seed = ctx.seed;
        let l = params.l_qubits();

        // Ensemble-averaged tabulation of g and h.
        let mut g_sum = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
        let mut h_sum = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
        for k in 0..ensemble as u64 {
            let instance = task_instance(&params, seed, false, ensemble, k)?;
            let (g, h) = tabulate_amplitudes(&instance, &grid)?;
            for i in 0..grid.len() {
                g_sum[i] += g[i];
                h_sum[i] += h[i];
            }
        }
        let table = AmplitudeTable {
            times: grid.clone(),
            g: g_sum.iter().map(|v| v / ensemble as f64).collect(),
            h: h_sum.iter().map(|v| v / ensemble as f64).collect(),
            l_qubits: l,
        };

        // Trajectory tasks: (setting, check time, trajectory).
        let per_point = trajectories as u64;
        let total = settings.len() as u64 * times.len() as u64 * per_point;
        let n_times = times.len() as u64;
        let policy_for_tasks = rate_policy.clone();
        let values = ctx.run_tasks(total, |id| {
            let point = id / per_point;
            let setting = (point / n_times) as usize;
            let t_idx = (point % n_times) as usize;
            let time = times[t_idx];
            let q = policy_for_tasks.rate(setting, time);

            let instance = task_instance(&params, seed, false, ensemble, id % ensemble as u64)?;
            let tau = scaled_angle(
                tau0_factor * policy_for_tasks.angle_scale(setting),
                time,
                instance.one_norm(),
            );
            let config = TetrisConfig::new(&instance, time, tau)?;
            let lambda = config.attenuation();
            let mut circuit_rng = stream_rng(seed, Channel::Circuit, id);
            let circuit = sample_circuit(&config, &mut circuit_rng)?;
            let mut state = StateVector::ancilla_plus_system_zero(l);
            let mut noise_rng = stream_rng(seed, Channel::Noise, id);
            run_conditional(
                &circuit,
                &config,
                &mut state,
                Control::AncillaIs(1),
                &NoiseSpec::Global { rate: q },
                &mut noise_rng,
            )?;
            let value = TrajValue {
                x_identity: state.expect_x_ancilla_diag(|_| 1.0)? / lambda,
                x_project_zero: state
                    .expect_x_ancilla_diag(|s| if s == 0 { 1.0 } else { 0.0 })?
                    / lambda,
                tq: circuit.tq_gate_estimate,
            };
            Ok(serde_json::to_value(value)?)
        })?;

        let observables = [
            ("identity", TraceObservable::Identity),
            ("project_zero", TraceObservable::ProjectZero),
        ];
        let mut rows = Vec::new();

        // Model curves on the full grid.
        for (s_idx, setting) in settings.iter().enumerate() {
            for (obs_name, obs) in &observables {
                for (i, &t) in grid.iter().enumerate() {
                    let q = rate_policy.rate(s_idx, t);
                    let value = rescaled_model_value(&table, i, q, *obs)?;
                    rows.push(vec![
                        "model".to_owned(),
                        setting.clone(),
                        (*obs_name).to_owned(),
                        fmt_f64(q),
                        fmt_f64(t),
                        fmt_f64(value),
                        String::new(),
                        String::new(),
                        String::new(),
                        seed.to_string(),
                    ]);
                }
            }
        }

        // Trajectory data at the check times.
        let mut data_points = Vec::new();
        for (s_idx, setting) in settings.iter().enumerate() {
            for (t_idx, &time) in times.iter().enumerate() {
                let base = ((s_idx * times.len() + t_idx) as u64 * per_point) as usize;
                let parsed: Vec<TrajValue> = values[base..base + trajectories]
                    .iter()
                    .map(from_value)
                    .collect::<Result<_, _>>()?;
                let q = rate_policy.rate(s_idx, time);
                let mean_tq =
                    parsed.iter().map(|v| v.tq as f64).sum::<f64>() / trajectories as f64;
                for (slot, (obs_name, obs)) in observables.iter().enumerate() {
                    let vals: Vec<f64> = parsed
                        .iter()
                        .map(|v| if slot == 0 { v.x_identity } else { v.x_project_zero })
                        .collect();
                    let (mean, se) = mean_se(&vals);
                    let errors_per_tq = if mean_tq > 0.0 { q * time / mean_tq } else { 0.0 };
                    rows.push(vec![
                        "data".to_owned(),
                        setting.clone(),
                        (*obs_name).to_owned(),
                        fmt_f64(q),
                        fmt_f64(time),
                        fmt_f64(mean),
                        fmt_f64(se.unwrap_or(f64::NAN)),
                        fmt_f64(mean_tq),
                        fmt_f64(errors_per_tq),
                        seed.to_string(),
                    ]);
                    let model = rescaled_model_value(&table, check_indices[t_idx], q, *obs)?;
                    data_points.push(json!({
                        "setting": setting,
                        "observable": obs_name,
                        "time": time,
                        "q": q,
                        "data": mean,
                        "sigma": se,
                        "model": model,
                        "z_vs_model": se.map(|s| (mean - model) / s.max(1e-300)),
                    }));
                }
            }
        }

        // Optional β refit on the shallow projector data.
        let mut fit_summary = serde_json::Value::Null;
        if cfg.study.fit_beta.unwrap_or(false) {
            if let RatePolicy::Beta { beta, alpha } = &rate_policy {
                let points: Vec<BetaFitPoint> = data_points
                    .iter()
                    .filter(|p| p["setting"] == "shallow" && p["observable"] == "project_zero")
                    .map(|p| BetaFitPoint {
                        time_index: check_indices
                            [times.iter().position(|&t| t == p["time"].as_f64().unwrap()).unwrap()],
                        y: p["data"].as_f64().unwrap(),
                        sigma: p["sigma"].as_f64().unwrap_or(f64::NAN),
                    })
                    .collect();
                let fit = fit_beta(&table, &points, TraceObservable::ProjectZero)
                    .map_err(ExpError::from)?;
                for (s_idx, setting) in settings.iter().enumerate() {
                    let rate_scale = if s_idx == 0 { 1.0 } else { 1.0 / alpha };
                    for (obs_name, obs) in &observables {
                        for (t_idx, &time) in times.iter().enumerate() {
                            let q = fit.beta * time * rate_scale;
                            let value =
                                rescaled_model_value(&table, check_indices[t_idx], q, *obs)?;
                            rows.push(vec![
                                "fit_prediction".to_owned(),
                                setting.clone(),
                                (*obs_name).to_owned(),
                                fmt_f64(q),
                                fmt_f64(time),
                                fmt_f64(value),
                                String::new(),
                                String::new(),
                                String::new(),
                                seed.to_string(),
                            ]);
                        }
                    }
                }
                fit_summary = json!({
                    "beta_injected": beta,
                    "beta_fit": fit.beta,
                    "beta_sigma": fit.sigma_beta,
                    "weighted_sse": fit.weighted_sse,
                });
            } else {
                return Err(ExpError::validation(
                    "study.fit_beta",
                    "requires the beta rate policy",
                ));
            }
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "noise_model_overlay",
                "settings": settings,
                "ensemble": ensemble,
                "points": data_points,
                "beta_fit": fit_summary,
            }),
        })
    }
}

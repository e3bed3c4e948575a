//! Gate-angle sweep under noise.
//!
//! Runs the echo-verified estimate at τ = α·τ₀ for a list of rescalings α
//! and reports how each observable drifts with the (noise-scaling) gate
//! count, together with linear and exponential extrapolations to zero
//! gates fitted across the sweep.

use serde_json::json;
use syklab_core::estimators::EchoObservable;
use syklab_core::tetris::scaled_angle;

use crate::config::ExperimentConfig;
use crate::experiments::{echo_circuit, from_value, fmt_f64, fmt_opt, mean_se, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct AngleSweep;

const HEADER: &[&str] = &[
    "alpha",
    "inv_alpha",
    "mean_tau",
    "observable",
    "y",
    "sigma",
    "mean_tq",
    "exact_re",
    "exact_se",
    "seed",
    "instance_mode",
    "task_base",
];

fn alphas(cfg: &ExperimentConfig) -> Result<&[f64], ExpError> {
    let alphas = cfg
        .study
        .alphas
        .as_ref()
        .ok_or_else(|| ExpError::validation("study.alphas", "required for angle_sweep"))?;
    if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(ExpError::validation("study.alphas", "need 0 < α ≤ 1"));
    }
    Ok(alphas)
}

/// Inverse-variance weighted linear fit y = a + b·x; returns (a, σ_a, b).
fn weighted_linear_fit(points: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    let mut s = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y, sigma) in points {
        if !(sigma > 0.0) {
            return None;
        }
        let w = 1.0 / (sigma * sigma);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let delta = s * sxx - sx * sx;
    if delta <= 0.0 {
        return None;
    }
    let a = (sxx * sy - sx * sxy) / delta;
    let b = (s * sxy - sx * sy) / delta;
    Some((a, (sxx / delta).sqrt(), b))
}

impl Experiment for AngleSweep {
    fn kind(&self) -> &'static str {
        "angle_sweep"
    }

    fn summary(&self) -> &'static str {
        "Estimates vs gate angle τ = α·τ₀ with zero-gate extrapolations"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        cfg.single_time()?;
        cfg.noise.to_spec()?;
        alphas(cfg)?;
        if cfg.sampling.circuits < 2 {
            return Err(ExpError::validation("sampling.circuits", "need ≥ 2"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let time = cfg.single_time()?;
        let params = cfg.syk_params(ctx.seed)?;
        let noise = cfg.noise.to_spec()?;
        let alpha_list = alphas(cfg)?.to_vec();
        let circuits = cfg.sampling.circuits;
        let shots = cfg.sampling.shots_per_circuit.max(1);
        let joint = cfg.sampling.joint_resampling;
        let ensemble = cfg.sampling.disorder_ensemble;
        let want_exact = cfg.study.exact_reference.unwrap_or(true) && params.l_qubits() <= 12;
        let tau0_factor = cfg.angle.tau0_factor;
        let seed = ctx.seed;

        let total = alpha_list.len() as u64 * circuits as u64;
        let values = ctx.run_tasks(total, |id| {
            let a_idx = (id / circuits as u64) as usize;
            let instance = task_instance(&params, seed, joint, ensemble, id)?;
            let tau = scaled_angle(tau0_factor * alpha_list[a_idx], time, instance.one_norm());
            let value = echo_circuit(
                &instance,
                time,
                tau,
                &noise,
                shots,
                want_exact && joint,
                seed,
                id,
            )?;
            Ok(serde_json::to_value(value)?)
        })?;

        let instance_mode = if joint {
            "joint".to_owned()
        } else {
            format!("fixed:{ensemble}")
        };
        // Fixed-mode exact reference over the pool.
        let fixed_exact = if want_exact && !joint {
            let mut vals = Vec::new();
            for k in 0..ensemble.max(1) as u64 {
                let instance = task_instance(&params, seed, false, ensemble, k)?;
                vals.push(
                    syklab_core::state::ExactEvolver::new(&instance)?
                        .loschmidt(time)
                        .re,
                );
            }
            Some(mean_se(&vals))
        } else {
            None
        };

        let mut rows = Vec::new();
        let mut fit_points: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); 3];
        for (a_idx, &alpha) in alpha_list.iter().enumerate() {
            let base = a_idx * circuits;
            let parsed: Vec<super::EchoCircuitValue> = values[base..base + circuits]
                .iter()
                .map(from_value)
                .collect::<Result<_, _>>()?;
            let mean_tau = parsed.iter().map(|v| v.tau).sum::<f64>() / circuits as f64;
            let mean_tq = parsed.iter().map(|v| v.tq as f64).sum::<f64>() / circuits as f64;
            let (exact_re, exact_se) = match (&fixed_exact, joint && want_exact) {
                (Some(pair), _) => *pair,
                (None, true) => {
                    let ex: Vec<f64> = parsed.iter().filter_map(|v| v.exact_re).collect();
                    mean_se(&ex)
                }
                _ => (f64::NAN, None),
            };
            for (slot, obs) in EchoObservable::ALL.iter().enumerate() {
                let per_circuit: Vec<f64> = parsed.iter().map(|v| v.values[slot]).collect();
                let (y, sigma) = mean_se(&per_circuit);
                rows.push(vec![
                    fmt_f64(alpha),
                    fmt_f64(1.0 / alpha),
                    fmt_f64(mean_tau),
                    obs.tag().to_owned(),
                    fmt_f64(y),
                    fmt_opt(sigma),
                    fmt_f64(mean_tq),
                    fmt_f64(exact_re),
                    fmt_opt(exact_se),
                    seed.to_string(),
                    instance_mode.clone(),
                    base.to_string(),
                ]);
                if let Some(s) = sigma {
                    fit_points[slot].push((mean_tq, y, s));
                }
            }
        }

        // Zero-gate extrapolations across the sweep.
        let mut fits = Vec::new();
        for (slot, obs) in EchoObservable::ALL.iter().enumerate() {
            let linear = weighted_linear_fit(&fit_points[slot]);
            let exponential = if fit_points[slot].iter().all(|&(_, y, _)| y > 0.0) {
                let logged: Vec<(f64, f64, f64)> = fit_points[slot]
                    .iter()
                    .map(|&(x, y, s)| (x, y.ln(), s / y))
                    .collect();
                weighted_linear_fit(&logged).map(|(a, sa, b)| (a.exp(), a.exp() * sa, b))
            } else {
                None
            };
            fits.push(json!({
                "observable": obs.tag(),
                "linear_intercept": linear.map(|(a, sa, b)| json!({"y0": a, "sigma": sa, "slope": b})),
                "exponential_intercept": exponential.map(|(a, sa, b)| json!({"y0": a, "sigma": sa, "log_slope": b})),
            }));
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "angle_sweep",
                "fits": fits,
            }),
        })
    }
}

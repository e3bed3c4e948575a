//! Loschmidt-amplitude scan over a time grid.
//!
//! For every time point, `circuits` echo-verified circuits are sampled
//! (fresh disorder per circuit in joint mode) and the λ⁻¹-rescaled
//! estimates for all three observables are reported next to the exact
//! oracle value when available.

use serde_json::json;
use syklab_core::estimators::EchoObservable;
use syklab_core::state::ExactEvolver;

use crate::config::ExperimentConfig;
use crate::experiments::{echo_circuit, from_value, fmt_f64, fmt_opt, mean_se, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct LoschmidtScan;

const HEADER: &[&str] = &[
    "time",
    "observable",
    "y",
    "sigma",
    "circuits",
    "shots_per_circuit",
    "mean_lambda",
    "mean_rotations",
    "mean_tq",
    "exact_re",
    "exact_se",
    "seed",
    "instance_mode",
    "task_base",
];

impl Experiment for LoschmidtScan {
    fn kind(&self) -> &'static str {
        "loschmidt_scan"
    }

    fn summary(&self) -> &'static str {
        "Echo-verified Loschmidt amplitude vs time, all three observables"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        cfg.require_times()?;
        cfg.angle.resolve(1.0, 1.0)?;
        cfg.noise.to_spec()?;
        if cfg.sampling.circuits < 2 {
            return Err(ExpError::validation(
                "sampling.circuits",
                "need ≥ 2 circuits for a standard error",
            ));
        }
        if cfg.sampling.shots_per_circuit == 0 {
            return Err(ExpError::validation(
                "sampling.shots_per_circuit",
                "must be positive",
            ));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let times = cfg.require_times()?.to_vec();
        let params = cfg.syk_params(ctx.seed)?;
        let noise = cfg.noise.to_spec()?;
        let circuits = cfg.sampling.circuits;
        let shots = cfg.sampling.shots_per_circuit;
        let joint = cfg.sampling.joint_resampling;
        let ensemble = cfg.sampling.disorder_ensemble;
        let want_exact = cfg.study.exact_reference.unwrap_or(true) && params.l_qubits() <= 12;
        let seed = ctx.seed;
        let angle = cfg.angle.clone();

        let total = times.len() as u64 * circuits as u64;
        let values = ctx.run_tasks(total, |id| {
            let t_idx = (id / circuits as u64) as usize;
            let time = times[t_idx];
            let instance = task_instance(&params, seed, joint, ensemble, id)?;
            let tau = angle.resolve(time, instance.one_norm())?;
            // Joint mode needs the per-instance exact value; fixed mode
            // computes references once in the reduce step below.
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

        // Fixed-mode exact references: evaluate the pool instances once.
        let fixed_exact: Option<Vec<(f64, Option<f64>)>> = if want_exact && !joint {
            let mut per_time = Vec::with_capacity(times.len());
            let mut evolvers = Vec::with_capacity(ensemble);
            for k in 0..ensemble.max(1) as u64 {
                let instance = task_instance(&params, seed, false, ensemble, k)?;
                evolvers.push(ExactEvolver::new(&instance)?);
            }
            for &t in &times {
                let vals: Vec<f64> = evolvers.iter().map(|e| e.loschmidt(t).re).collect();
                per_time.push(mean_se(&vals));
            }
            Some(per_time)
        } else {
            None
        };

        let mut rows = Vec::new();
        let mut summary_points = Vec::new();
        let instance_mode = if joint {
            "joint".to_owned()
        } else {
            format!("fixed:{ensemble}")
        };
        for (t_idx, &time) in times.iter().enumerate() {
            let base = t_idx * circuits;
            let slice = &values[base..base + circuits];
            let parsed: Vec<super::EchoCircuitValue> = slice
                .iter()
                .map(from_value)
                .collect::<Result<_, _>>()?;
            let mean_lambda = parsed.iter().map(|v| v.lambda).sum::<f64>() / circuits as f64;
            let mean_rot =
                parsed.iter().map(|v| v.rotations as f64).sum::<f64>() / circuits as f64;
            let mean_tq = parsed.iter().map(|v| v.tq as f64).sum::<f64>() / circuits as f64;
            let (exact_re, exact_se) = match (&fixed_exact, joint) {
                (Some(per_time), _) => per_time[t_idx],
                (None, true) if want_exact => {
                    let ex: Vec<f64> = parsed.iter().filter_map(|v| v.exact_re).collect();
                    mean_se(&ex)
                }
                _ => (f64::NAN, None),
            };

            for (slot, obs) in EchoObservable::ALL.iter().enumerate() {
                let per_circuit: Vec<f64> = parsed.iter().map(|v| v.values[slot]).collect();
                let (y, sigma) = mean_se(&per_circuit);
                rows.push(vec![
                    fmt_f64(time),
                    obs.tag().to_owned(),
                    fmt_f64(y),
                    fmt_opt(sigma),
                    circuits.to_string(),
                    shots.to_string(),
                    fmt_f64(mean_lambda),
                    fmt_f64(mean_rot),
                    fmt_f64(mean_tq),
                    fmt_f64(exact_re),
                    fmt_opt(exact_se),
                    seed.to_string(),
                    instance_mode.clone(),
                    base.to_string(),
                ]);
                if exact_re.is_finite() {
                    if let Some(s) = sigma {
                        let combined =
                            (s * s + exact_se.unwrap_or(0.0).powi(2)).sqrt().max(1e-300);
                        summary_points.push(json!({
                            "time": time,
                            "observable": obs.tag(),
                            "z_vs_exact": (y - exact_re) / combined,
                        }));
                    }
                }
            }
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "loschmidt_scan",
                "points": summary_points,
            }),
        })
    }
}

//! Shot-noise study over gate count and shots per circuit.
//!
//! At a fixed time and total shot budget, circuits are sampled at several
//! gate angles (α·τ₀, smaller α → more gates) and split into groups of
//! 1, 10, … shots per circuit. The reported `sd_circuit` is the standard
//! deviation over circuit-level means — the quantity that shrinks by about
//! √(shots) while shot noise dominates.

use serde_json::json;
use syklab_core::estimators::EchoObservable;
use syklab_core::tetris::scaled_angle;

use crate::config::ExperimentConfig;
use crate::experiments::{echo_circuit, from_value, fmt_f64, sd_and_sem, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct VarianceStudy;

const HEADER: &[&str] = &[
    "alpha",
    "mean_tau",
    "shots_per_circuit",
    "circuits",
    "observable",
    "y",
    "sd_circuit",
    "sem",
    "mean_tq",
    "seed",
    "instance_mode",
    "task_base",
];

struct Point {
    alpha: f64,
    shots: usize,
    circuits: usize,
    task_base: u64,
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<Point>, ExpError> {
    let alphas = cfg
        .study
        .alphas
        .as_ref()
        .ok_or_else(|| ExpError::validation("study.alphas", "required for variance_study"))?;
    let shots_grid = cfg
        .study
        .shots_grid
        .as_ref()
        .ok_or_else(|| ExpError::validation("study.shots_grid", "required for variance_study"))?;
    let total = cfg
        .study
        .total_shots
        .ok_or_else(|| ExpError::validation("study.total_shots", "required for variance_study"))?;
    let mut out = Vec::new();
    let mut base = 0u64;
    for &alpha in alphas {
        if !(alpha > 0.0) {
            return Err(ExpError::validation("study.alphas", "must be positive"));
        }
        for &shots in shots_grid {
            if shots == 0 {
                return Err(ExpError::validation("study.shots_grid", "must be positive"));
            }
            let circuits = total / shots;
            if circuits < 2 {
                return Err(ExpError::validation(
                    "study.total_shots",
                    format!("budget gives {circuits} circuits at {shots} shots/circuit"),
                ));
            }
            out.push(Point {
                alpha,
                shots,
                circuits,
                task_base: base,
            });
            base += circuits as u64;
        }
    }
    Ok(out)
}

impl Experiment for VarianceStudy {
    fn kind(&self) -> &'static str {
        "variance_study"
    }

    fn summary(&self) -> &'static str {
        "Circuit-level standard deviation vs gate count and shots per circuit"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        cfg.single_time()?;
        cfg.noise.to_spec()?;
        points(cfg)?;
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let time = cfg.single_time()?;
        let params = cfg.syk_params(ctx.seed)?;
        let noise = cfg.noise.to_spec()?;
        let pts = points(cfg)?;
        let joint = cfg.sampling.joint_resampling;
        let ensemble = cfg.sampling.disorder_ensemble;
        let tau0_factor = cfg.angle.tau0_factor;
        let seed = ctx.seed;

        let total: u64 = pts.iter().map(|p| p.circuits as u64).sum();
        let values = ctx.run_tasks(total, |id| {
            let point = pts
                .iter()
                .rev()
                .find(|p| id >= p.task_base)
                .expect("task within some point");
            let instance = task_instance(&params, seed, joint, ensemble, id)?;
            let tau = scaled_angle(tau0_factor * point.alpha, time, instance.one_norm());
            let value = echo_circuit(
                &instance,
                time,
                tau,
                &noise,
                point.shots,
                false,
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
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for point in &pts {
            let slice =
                &values[point.task_base as usize..point.task_base as usize + point.circuits];
            let parsed: Vec<super::EchoCircuitValue> =
                slice.iter().map(from_value).collect::<Result<_, _>>()?;
            let mean_tau = parsed.iter().map(|v| v.tau).sum::<f64>() / parsed.len() as f64;
            let mean_tq = parsed.iter().map(|v| v.tq as f64).sum::<f64>() / parsed.len() as f64;
            for (slot, obs) in EchoObservable::ALL.iter().enumerate() {
                let per_circuit: Vec<f64> = parsed.iter().map(|v| v.values[slot]).collect();
                let mean = per_circuit.iter().sum::<f64>() / per_circuit.len() as f64;
                let (sd, sem) = sd_and_sem(&per_circuit);
                rows.push(vec![
                    fmt_f64(point.alpha),
                    fmt_f64(mean_tau),
                    point.shots.to_string(),
                    point.circuits.to_string(),
                    obs.tag().to_owned(),
                    fmt_f64(mean),
                    fmt_f64(sd),
                    fmt_f64(sem),
                    fmt_f64(mean_tq),
                    seed.to_string(),
                    instance_mode.clone(),
                    point.task_base.to_string(),
                ]);
                summary.push(json!({
                    "alpha": point.alpha,
                    "shots_per_circuit": point.shots,
                    "observable": obs.tag(),
                    "sd_circuit": sd,
                    "mean_tq": mean_tq,
                }));
            }
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "variance_study",
                "points": summary,
            }),
        })
    }
}

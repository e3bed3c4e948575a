//! Mirror benchmarks across a two-qubit depolarizing sweep.

use serde::{Deserialize, Serialize};
use serde_json::json;
use syklab_core::mirror::{
    mirror_on_average, process_fidelity_curve, standard_mirror, MirrorRunSpec,
};
use syklab_core::state::NoiseSpec;

use crate::config::ExperimentConfig;
use crate::experiments::{from_value, fmt_f64, mean_se, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct MirrorSweep;

const HEADER: &[&str] = &[
    "p_dep",
    "standard_mirror",
    "standard_se",
    "mirror_on_average",
    "on_average_se",
    "local_obs",
    "local_se",
    "mean_tq_mirror",
    "mean_tq_on_average",
    "fidelity_model",
    "seed",
    "ensemble",
    "samples",
];

#[derive(Debug, Serialize, Deserialize)]
struct InstancePoint {
    standard: f64,
    standard_se: Option<f64>,
    on_average: f64,
    on_average_se: Option<f64>,
    local_obs: f64,
    local_se: Option<f64>,
    tq_mirror: f64,
    tq_on_average: f64,
}

fn p_grid(cfg: &ExperimentConfig) -> Result<&[f64], ExpError> {
    let grid = cfg
        .study
        .p_dep_grid
        .as_ref()
        .ok_or_else(|| ExpError::validation("study.p_dep_grid", "required for mirror_sweep"))?;
    if grid.is_empty() || grid.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(ExpError::validation("study.p_dep_grid", "rates must be in [0, 1]"));
    }
    Ok(grid)
}

impl Experiment for MirrorSweep {
    fn kind(&self) -> &'static str {
        "mirror_sweep"
    }

    fn summary(&self) -> &'static str {
        "Standard vs averaged mirror benchmarks and a local observable vs p_dep"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        cfg.single_time()?;
        p_grid(cfg)?;
        if cfg.study.samples.unwrap_or(0) < 2 {
            return Err(ExpError::validation("study.samples", "need ≥ 2 trajectory pairs"));
        }
        cfg.angle.resolve(1.0, 1.0)?;
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let time = cfg.single_time()?;
        let params = cfg.syk_params(ctx.seed)?;
        let grid = p_grid(cfg)?.to_vec();
        let samples = cfg.study.samples.unwrap_or(0);
        let ensemble = cfg.sampling.disorder_ensemble.max(1);
        let angle = cfg.angle.clone();
        let seed = ctx.seed;

        let total = grid.len() as u64 * ensemble as u64;
        let values = ctx.run_tasks(total, |id| {
            let p_idx = (id / ensemble as u64) as usize;
            let inst_idx = id % ensemble as u64;
            let instance = task_instance(&params, seed, false, ensemble, inst_idx)?;
            let tau = angle.resolve(time, instance.one_norm())?;
            let noise = if grid[p_idx] > 0.0 {
                NoiseSpec::PerGate { p_dep: grid[p_idx] }
            } else {
                NoiseSpec::None
            };
            // Distinct circuit/noise streams per (p, instance) cell.
            let spec = MirrorRunSpec {
                time,
                gate_angle: tau,
                noise,
                samples,
                seed: seed ^ (id << 1),
            };
            let avg = mirror_on_average(&instance, &spec)?;
            let std = standard_mirror(&instance, &spec)?;
            let point = InstancePoint {
                standard: std.survival.mean,
                standard_se: std.survival.std_error,
                on_average: avg.survival.mean,
                on_average_se: avg.survival.std_error,
                local_obs: avg.local_obs.mean,
                local_se: avg.local_obs.std_error,
                tq_mirror: std.mean_tq,
                tq_on_average: avg.mean_tq,
            };
            Ok(serde_json::to_value(point)?)
        })?;

        let mut rows = Vec::new();
        let mut ordering = Vec::new();
        for (p_idx, &p) in grid.iter().enumerate() {
            let parsed: Vec<InstancePoint> = values[p_idx * ensemble..(p_idx + 1) * ensemble]
                .iter()
                .map(from_value)
                .collect::<Result<_, _>>()?;
            // Ensemble mean; across-instance spread when K ≥ 2, else the
            // within-instance SE.
            let combine = |f: &dyn Fn(&InstancePoint) -> f64,
                           se: &dyn Fn(&InstancePoint) -> Option<f64>|
             -> (f64, f64) {
                let vals: Vec<f64> = parsed.iter().map(|d| f(d)).collect();
                let (mean, spread) = mean_se(&vals);
                let se = spread.unwrap_or_else(|| se(&parsed[0]).unwrap_or(f64::NAN));
                (mean, se)
            };
            let (std_m, std_se) = combine(&|d| d.standard, &|d| d.standard_se);
            let (avg_m, avg_se) = combine(&|d| d.on_average, &|d| d.on_average_se);
            let (loc_m, loc_se) = combine(&|d| d.local_obs, &|d| d.local_se);
            let tq_mirror =
                parsed.iter().map(|d| d.tq_mirror).sum::<f64>() / ensemble as f64;
            let tq_avg =
                parsed.iter().map(|d| d.tq_on_average).sum::<f64>() / ensemble as f64;
            let fidelity = process_fidelity_curve(p, tq_mirror);
            rows.push(vec![
                fmt_f64(p),
                fmt_f64(std_m),
                fmt_f64(std_se),
                fmt_f64(avg_m),
                fmt_f64(avg_se),
                fmt_f64(loc_m),
                fmt_f64(loc_se),
                fmt_f64(tq_mirror),
                fmt_f64(tq_avg),
                fmt_f64(fidelity),
                seed.to_string(),
                ensemble.to_string(),
                samples.to_string(),
            ]);
            ordering.push(json!({
                "p_dep": p,
                "standard": std_m,
                "on_average": avg_m,
                "local_obs": loc_m,
                "fidelity_model": fidelity,
                "ordering_ok": std_m <= avg_m + 3.0 * (std_se.powi(2) + avg_se.powi(2)).sqrt(),
            }));
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "mirror_sweep",
                "points": ordering,
            }),
        })
    }
}

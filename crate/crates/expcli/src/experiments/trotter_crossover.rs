//! Gate-cost crossover between the randomized sampler and first-order
//! Trotterization, disorder-averaged over an ensemble per system size.

use serde::{Deserialize, Serialize};
use serde_json::json;
use syklab_core::state::ExactEvolver;
use syklab_core::syk::SykParams;
use syklab_core::tetris::{expected_tq_per_rotation, optimal_angle};
use syklab_core::trotter::{trotter_relative_error_with, TermOrdering, TrotterPlan};

use crate::config::ExperimentConfig;
use crate::experiments::{from_value, fmt_f64, fmt_opt, task_instance};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct TrotterCrossover;

const HEADER: &[&str] = &[
    "n_majorana",
    "time",
    "tq_tetris_optimal",
    "tq_trotter_s1",
    "tq_trotter_s2",
    "cheaper_scheme",
    "rel_error_s1",
    "undefined_s1",
    "rel_error_s2",
    "undefined_s2",
    "mean_exact_re",
    "seed",
    "ensemble",
];

#[derive(Debug, Serialize, Deserialize)]
struct InstanceData {
    /// Per time point: TETRIS expected TQ at the optimal angle.
    tetris_tq: Vec<f64>,
    /// Per time point and step count: relative error (None when Re L ≈ 0).
    errors: Vec<[Option<f64>; 2]>,
    /// Per step count: Trotter TQ (time-independent).
    trotter_tq: [f64; 2],
    /// Per time point: exact Re L.
    exact_re: Vec<f64>,
}

fn lists(cfg: &ExperimentConfig) -> Result<(Vec<usize>, Vec<usize>), ExpError> {
    let ns = cfg
        .study
        .n_majorana_list
        .clone()
        .ok_or_else(|| ExpError::validation("study.n_majorana_list", "required"))?;
    if ns.is_empty() {
        return Err(ExpError::validation("study.n_majorana_list", "must not be empty"));
    }
    let steps = cfg.study.trotter_steps.clone().unwrap_or_else(|| vec![1, 2]);
    if steps != vec![1, 2] {
        return Err(ExpError::validation(
            "study.trotter_steps",
            "the frozen schema compares exactly steps [1, 2]",
        ));
    }
    Ok((ns, steps))
}

impl Experiment for TrotterCrossover {
    fn kind(&self) -> &'static str {
        "trotter_crossover"
    }

    fn summary(&self) -> &'static str {
        "TETRIS-vs-Trotter TQ cost and Trotter error over a time grid"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        cfg.syk()?;
        cfg.require_times()?;
        lists(cfg)?;
        if cfg.sampling.disorder_ensemble == 0 {
            return Err(ExpError::validation("sampling.disorder_ensemble", "need ≥ 1"));
        }
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let times = cfg.require_times()?.to_vec();
        let (ns, _steps) = lists(cfg)?;
        let ensemble = cfg.sampling.disorder_ensemble;
        let base = cfg.syk()?;
        let seed = ctx.seed;

        let total = ns.len() as u64 * ensemble as u64;
        let times_inner = times.clone();
        let ns_inner = ns.clone();
        let k = base.sparsity_k;
        let j = base.coupling_scale;
        let values = ctx.run_tasks(total, |id| {
            let n_idx = (id / ensemble as u64) as usize;
            let inst_idx = id % ensemble as u64;
            let params = SykParams {
                n_majorana: ns_inner[n_idx],
                coupling_scale: j,
                sparsity_k: k,
                dense: false,
                seed,
            };
            // Stream offset keeps instances independent across sizes.
            let instance =
                task_instance(&params, seed, true, 1, (n_idx as u64) << 32 | inst_idx)?;
            let evolver = ExactEvolver::new(&instance)?;
            let mu = instance.one_norm();
            let tq_rot = expected_tq_per_rotation(&instance);

            let mut tetris_tq = Vec::with_capacity(times_inner.len());
            let mut errors = Vec::with_capacity(times_inner.len());
            let mut exact_re = Vec::with_capacity(times_inner.len());
            for &t in &times_inner {
                let tau = optimal_angle(t, mu);
                tetris_tq.push(t * mu / tau.sin() * tq_rot);
                exact_re.push(evolver.loschmidt(t).re);
                let e1 = trotter_relative_error_with(&evolver, &instance, t, 1)?;
                let e2 = trotter_relative_error_with(&evolver, &instance, t, 2)?;
                errors.push([e1, e2]);
            }
            let plan1 = TrotterPlan::new(&instance, 1, TermOrdering::DescendingMagnitude)?;
            let plan2 = TrotterPlan::new(&instance, 2, TermOrdering::DescendingMagnitude)?;
            let data = InstanceData {
                tetris_tq,
                errors,
                trotter_tq: [plan1.tq_gate_count as f64, plan2.tq_gate_count as f64],
                exact_re,
            };
            Ok(serde_json::to_value(data)?)
        })?;

        let mut rows = Vec::new();
        let mut crossings = Vec::new();
        for (n_idx, &n) in ns.iter().enumerate() {
            let parsed: Vec<InstanceData> = values
                [n_idx * ensemble..(n_idx + 1) * ensemble]
                .iter()
                .map(from_value)
                .collect::<Result<_, _>>()?;
            let mut first_crossing: Option<(f64, Option<f64>)> = None;
            for (t_idx, &t) in times.iter().enumerate() {
                let mean =
                    |f: &dyn Fn(&InstanceData) -> f64| -> f64 {
                        parsed.iter().map(|d| f(d)).sum::<f64>() / ensemble as f64
                    };
                let tetris = mean(&|d| d.tetris_tq[t_idx]);
                let trot1 = mean(&|d| d.trotter_tq[0]);
                let trot2 = mean(&|d| d.trotter_tq[1]);
                let exact = mean(&|d| d.exact_re[t_idx]);
                let mut err_mean = [None, None];
                let mut undefined = [0usize, 0usize];
                for s in 0..2 {
                    let defined: Vec<f64> = parsed
                        .iter()
                        .filter_map(|d| d.errors[t_idx][s])
                        .collect();
                    undefined[s] = ensemble - defined.len();
                    if !defined.is_empty() {
                        err_mean[s] = Some(defined.iter().sum::<f64>() / defined.len() as f64);
                    }
                }
                let cheaper = if tetris <= trot1 && tetris <= trot2 {
                    "tetris_optimal"
                } else if trot1 <= trot2 {
                    "trotter_s1"
                } else {
                    "trotter_s2"
                };
                if first_crossing.is_none() && trot1 <= tetris {
                    first_crossing = Some((t, err_mean[0]));
                }
                rows.push(vec![
                    n.to_string(),
                    fmt_f64(t),
                    fmt_f64(tetris),
                    fmt_f64(trot1),
                    fmt_f64(trot2),
                    cheaper.to_owned(),
                    fmt_opt(err_mean[0]),
                    undefined[0].to_string(),
                    fmt_opt(err_mean[1]),
                    undefined[1].to_string(),
                    fmt_f64(exact),
                    seed.to_string(),
                    ensemble.to_string(),
                ]);
            }
            crossings.push(json!({
                "n_majorana": n,
                "first_time_trotter_s1_cheaper": first_crossing.map(|(t, _)| t),
                "rel_error_at_crossing": first_crossing.and_then(|(_, e)| e),
            }));
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "trotter_crossover",
                "crossings": crossings,
            }),
        })
    }
}

//! Closed-form resource projections printed as a table and persisted as CSV.

use serde::{Deserialize, Serialize};
use serde_json::json;
use syklab_core::resources::{
    evolution_tq_count, otoc_tq_count, runtime_estimate, ResourceQuery,
};

use crate::config::ExperimentConfig;
use crate::experiments::{from_value, fmt_f64, fmt_opt};
use crate::registry::Experiment;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

pub struct Resources;

const HEADER: &[&str] = &[
    "l_qubits",
    "sparsity_k",
    "jt",
    "evolution_tq",
    "otoc_tq",
    "serial_hours",
    "parallel_factor",
    "parallel_hours",
];

#[derive(Debug, Serialize, Deserialize)]
struct ResourceRow {
    l_qubits: usize,
    jt: f64,
    evolution_tq: f64,
    otoc_tq: f64,
    serial_hours: f64,
    parallel_factor: Option<u64>,
    parallel_hours: Option<f64>,
}

fn study_inputs(cfg: &ExperimentConfig) -> Result<(Vec<usize>, f64, f64, bool), ExpError> {
    let ls = cfg
        .study
        .l_qubits_list
        .clone()
        .ok_or_else(|| ExpError::validation("study.l_qubits_list", "required for resources"))?;
    if ls.is_empty() || ls.iter().any(|&l| l < 2) {
        return Err(ExpError::validation("study.l_qubits_list", "need L ≥ 2"));
    }
    let k = cfg
        .study
        .sparsity_k
        .or_else(|| cfg.syk.as_ref().map(|s| s.sparsity_k))
        .ok_or_else(|| ExpError::validation("study.sparsity_k", "required for resources"))?;
    let depth_ms = cfg.study.depth_time_ms.unwrap_or(30.0);
    if depth_ms < 0.0 {
        return Err(ExpError::validation("study.depth_time_ms", "must be non-negative"));
    }
    Ok((ls, k, depth_ms, cfg.study.parallel.unwrap_or(true)))
}

impl Experiment for Resources {
    fn kind(&self) -> &'static str {
        "resources"
    }

    fn summary(&self) -> &'static str {
        "Order-of-magnitude gate counts and runtimes for large systems"
    }

    fn csv_header(&self) -> &'static [&'static str] {
        HEADER
    }

    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError> {
        study_inputs(cfg)?;
        Ok(())
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError> {
        let (ls, k, depth_ms, parallel) = study_inputs(cfg)?;
        let jt_override = cfg.study.jt;

        let ls_inner = ls.clone();
        let values = ctx.run_tasks(ls.len() as u64, |id| {
            let l = ls_inner[id as usize];
            let query = ResourceQuery {
                l_qubits: l,
                sparsity_k: k,
                jt: jt_override,
                depth_time_s: depth_ms / 1000.0,
                parallel,
            };
            query.validate()?;
            let otoc = otoc_tq_count(&query);
            let runtime = runtime_estimate(&query, otoc);
            let row = ResourceRow {
                l_qubits: l,
                jt: query.effective_jt(),
                evolution_tq: evolution_tq_count(&query),
                otoc_tq: otoc,
                serial_hours: runtime.serial_hours(),
                parallel_factor: runtime.parallel_factor,
                parallel_hours: runtime.parallel_hours(),
            };
            Ok(serde_json::to_value(row)?)
        })?;

        let mut rows = Vec::new();
        println!(
            "{:>8} {:>8} {:>14} {:>14} {:>14} {:>10} {:>14}   (order-of-magnitude estimates)",
            "L", "Jt", "evolution TQ", "OTOC TQ", "serial [h]", "parallel", "parallel [h]"
        );
        for value in &values {
            let r: ResourceRow = from_value(value)?;
            println!(
                "{:>8} {:>8.3} {:>14.3e} {:>14.3e} {:>14.2} {:>10} {:>14}",
                r.l_qubits,
                r.jt,
                r.evolution_tq,
                r.otoc_tq,
                r.serial_hours,
                r.parallel_factor
                    .map(|f| f.to_string())
                    .unwrap_or_else(|| "-".into()),
                r.parallel_hours
                    .map(|h| format!("{h:.2}"))
                    .unwrap_or_else(|| "-".into()),
            );
            rows.push(vec![
                r.l_qubits.to_string(),
                fmt_f64(k),
                fmt_f64(r.jt),
                fmt_f64(r.evolution_tq),
                fmt_f64(r.otoc_tq),
                fmt_f64(r.serial_hours),
                r.parallel_factor
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
                fmt_opt(r.parallel_hours),
            ]);
        }

        Ok(RunOutput {
            rows,
            summary: json!({
                "kind": "resources",
                "sparsity_k": k,
                "depth_time_ms": depth_ms,
                "note": "order-of-magnitude estimates; no uncertainty model",
            }),
        })
    }
}

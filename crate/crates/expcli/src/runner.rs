//! Run orchestration: work queue, resume bookkeeping, and output files.
//!
//! A run writes three files into the output directory:
//!
//! * `manifest.json` — config echo + hash, effective seed, code version,
//!   timestamps, task progress. The only file carrying wall-clock data.
//! * `results.csv` — the experiment's frozen row schema, assembled in task
//!   order so the body is byte-identical across reruns.
//! * `summary.json` — kind-specific aggregates.
//!
//! Tasks are executed on a rayon pool sized by `--workers`; completed task
//! outputs are appended to `tasks.partial.jsonl` in chunks, and a rerun
//! with the same config hash resumes from whatever completed earlier.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::registry::Experiment;
use crate::ExpError;

const PARTIAL_FILE: &str = "tasks.partial.jsonl";
const MANIFEST_FILE: &str = "manifest.json";
const RESULTS_FILE: &str = "results.csv";
const SUMMARY_FILE: &str = "summary.json";

/// Rows plus summary returned by an experiment.
pub struct RunOutput {
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
}

/// Everything a run needs besides the config.
pub struct RunContext {
    pub out_dir: PathBuf,
    /// Effective master seed (config seed unless overridden).
    pub seed: u64,
    pub workers: usize,
    pub resume: bool,
    config_hash: String,
    manifest: Manifest,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    kind: String,
    config_hash: String,
    config: Value,
    seed: u64,
    code_version: String,
    started_unix: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    finished_unix: Option<u64>,
    tasks_total: u64,
    tasks_completed: u64,
    status: String,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn code_version() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| format!("expcli-{}", env!("CARGO_PKG_VERSION")))
}

/// Canonical hash of (config, seed): resumability is keyed on it.
fn hash_config(cfg: &ExperimentConfig, seed: u64) -> Result<String, ExpError> {
    let canonical = serde_json::to_vec(&(cfg, seed))?;
    let mut hasher = Sha256::new();
    hasher.update(&canonical);
    Ok(format!("{:x}", hasher.finalize()))
}

impl RunContext {
    pub fn new(
        cfg: &ExperimentConfig,
        out_dir: PathBuf,
        seed: u64,
        workers: usize,
        resume: bool,
    ) -> Result<Self, ExpError> {
        fs::create_dir_all(&out_dir)?;
        let config_hash = hash_config(cfg, seed)?;
        let manifest = Manifest {
            schema_version: crate::config::SCHEMA_VERSION,
            kind: cfg.kind.clone(),
            config_hash: config_hash.clone(),
            config: serde_json::to_value(cfg)?,
            seed,
            code_version: code_version(),
            started_unix: now_unix(),
            finished_unix: None,
            tasks_total: 0,
            tasks_completed: 0,
            status: "running".into(),
        };
        Ok(Self {
            out_dir,
            seed,
            workers,
            resume,
            config_hash,
            manifest,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_manifest(&self) -> Result<(), ExpError> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(self.path(MANIFEST_FILE), text)?;
        Ok(())
    }

    /// Execute `total` tasks, resuming completed ids from a previous
    /// partial run with the same config hash. Returns outputs in task-id
    /// order.
    pub fn run_tasks<F>(&mut self, total: u64, task: F) -> Result<Vec<Value>, ExpError>
    where
        F: Fn(u64) -> Result<Value, ExpError> + Sync,
    {
        self.manifest.tasks_total = total;
        let mut done: Vec<Option<Value>> = vec![None; total as usize];

        let partial_path = self.path(PARTIAL_FILE);
        if self.resume && partial_path.exists() {
            if let Some(prior) = self.load_partial(&partial_path)? {
                for (id, value) in prior {
                    if id < total {
                        done[id as usize] = Some(value);
                    }
                }
            } else {
                fs::remove_file(&partial_path)?;
            }
        } else if partial_path.exists() {
            fs::remove_file(&partial_path)?;
        }

        let missing: Vec<u64> = (0..total)
            .filter(|&id| done[id as usize].is_none())
            .collect();
        self.manifest.tasks_completed = total - missing.len() as u64;
        self.write_manifest()?;

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| ExpError::Other(format!("thread pool: {e}")))?;

        let mut partial = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&partial_path)?;
        let chunk_size = (self.workers.max(1) * 64).max(64);
        for chunk in missing.chunks(chunk_size) {
            let results: Vec<(u64, Result<Value, ExpError>)> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&id| (id, task(id)))
                    .collect()
            });
            for (id, result) in results {
                let value = result?;
                let line = serde_json::to_string(&PartialLine {
                    hash: &self.config_hash,
                    task: id,
                    value: &value,
                })?;
                writeln!(partial, "{line}")?;
                done[id as usize] = Some(value);
                self.manifest.tasks_completed += 1;
            }
            partial.flush()?;
            self.write_manifest()?;
        }

        Ok(done.into_iter().map(|v| v.expect("all tasks ran")).collect())
    }

    fn load_partial(&self, path: &Path) -> Result<Option<Vec<(u64, Value)>>, ExpError> {
        let text = fs::read_to_string(path)?;
        let mut out = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: OwnedPartialLine = match serde_json::from_str(line) {
                Ok(p) => p,
                Err(_) => return Ok(None), // truncated tail line: drop file
            };
            if parsed.hash != self.config_hash {
                return Ok(None); // different run: start over
            }
            out.push((parsed.task, parsed.value));
        }
        Ok(Some(out))
    }

    /// Write results.csv + summary.json and finalize the manifest.
    pub fn finish(
        &mut self,
        experiment: &dyn Experiment,
        output: RunOutput,
    ) -> Result<(), ExpError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(self.path(RESULTS_FILE))
            .map_err(|e| ExpError::Other(format!("csv: {e}")))?;
        writer
            .write_record(experiment.csv_header())
            .map_err(|e| ExpError::Other(format!("csv: {e}")))?;
        for row in &output.rows {
            if row.len() != experiment.csv_header().len() {
                return Err(ExpError::Other(format!(
                    "row width {} does not match the {} schema",
                    row.len(),
                    experiment.kind()
                )));
            }
            writer
                .write_record(row)
                .map_err(|e| ExpError::Other(format!("csv: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| ExpError::Other(format!("csv: {e}")))?;

        fs::write(
            self.path(SUMMARY_FILE),
            serde_json::to_string_pretty(&output.summary)?,
        )?;

        let partial = self.path(PARTIAL_FILE);
        if partial.exists() {
            fs::remove_file(partial)?;
        }
        self.manifest.finished_unix = Some(now_unix());
        self.manifest.status = "complete".into();
        self.write_manifest()?;
        Ok(())
    }

    pub fn results_path(&self) -> PathBuf {
        self.path(RESULTS_FILE)
    }

    pub fn summary_path(&self) -> PathBuf {
        self.path(SUMMARY_FILE)
    }
}

#[derive(Serialize)]
struct PartialLine<'a> {
    hash: &'a str,
    task: u64,
    value: &'a Value,
}

#[derive(Deserialize)]
struct OwnedPartialLine {
    hash: String,
    task: u64,
    value: Value,
}

/// Drive one experiment end to end.
pub fn run_experiment(
    experiment: &dyn Experiment,
    cfg: &ExperimentConfig,
    out_dir: PathBuf,
    seed_override: Option<u64>,
    workers: usize,
    resume: bool,
) -> Result<RunContext, ExpError> {
    if cfg.kind != experiment.kind() {
        return Err(ExpError::validation(
            "kind",
            format!(
                "config says {:?} but the {:?} experiment was invoked",
                cfg.kind,
                experiment.kind()
            ),
        ));
    }
    experiment.validate(cfg)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let mut ctx = RunContext::new(cfg, out_dir, seed, workers, resume)?;
    let output = experiment.run(cfg, &mut ctx)?;
    ctx.finish(experiment, output)?;
    Ok(ctx)
}

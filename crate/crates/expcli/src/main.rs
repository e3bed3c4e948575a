//! Experiment runner CLI.
//!
//! One subcommand per registered experiment kind, built from the registry
//! at startup:
//!
//! ```text
//!   expcli <kind> --config exp.toml --out runs/exp1 [--seed-override N]
//!          [--workers N] [--no-resume]
//!   expcli list
//! ```
//!
//! Exit codes: 0 ok, 2 validation error, 3 capability error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, Command};

use expcli::config::ExperimentConfig;
use expcli::registry::Registry;
use expcli::runner::run_experiment;
use expcli::ExpError;

fn cli(registry: &Registry) -> Command {
    let mut cmd = Command::new("expcli")
        .about("Sparse SYK simulation experiments")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(Command::new("list").about("List registered experiment kinds"));
    for exp in registry.iter() {
        cmd = cmd.subcommand(
            Command::new(exp.kind())
                .about(exp.summary())
                .arg(
                    Arg::new("config")
                        .long("config")
                        .required(true)
                        .value_parser(value_parser!(PathBuf))
                        .help("TOML experiment configuration"),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .required(true)
                        .value_parser(value_parser!(PathBuf))
                        .help("Output directory (manifest.json, results.csv, summary.json)"),
                )
                .arg(
                    Arg::new("seed-override")
                        .long("seed-override")
                        .value_parser(value_parser!(u64))
                        .help("Replace the config seed"),
                )
                .arg(
                    Arg::new("workers")
                        .long("workers")
                        .value_parser(value_parser!(usize))
                        .default_value("1")
                        .help("Worker threads for the task queue"),
                )
                .arg(
                    Arg::new("no-resume")
                        .long("no-resume")
                        .action(ArgAction::SetTrue)
                        .help("Ignore any partial results in the output directory"),
                ),
        );
    }
    cmd
}

fn run() -> Result<(), ExpError> {
    let registry = Registry::with_builtin();
    let matches = cli(&registry).get_matches();

    let (kind, sub) = matches.subcommand().expect("subcommand required");
    if kind == "list" {
        for exp in registry.iter() {
            println!("{:<24} {}", exp.kind(), exp.summary());
        }
        return Ok(());
    }

    let experiment = registry
        .get(kind)
        .ok_or_else(|| ExpError::Validation(format!("unknown experiment kind {kind:?}")))?;
    let config_path: &PathBuf = sub.get_one("config").expect("required");
    let out_dir: &PathBuf = sub.get_one("out").expect("required");
    let seed_override = sub.get_one::<u64>("seed-override").copied();
    let workers = *sub.get_one::<usize>("workers").expect("defaulted");
    let resume = !sub.get_flag("no-resume");

    let text = std::fs::read_to_string(config_path).map_err(|e| {
        ExpError::Validation(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let cfg = ExperimentConfig::from_toml(&text)?;

    let ctx = run_experiment(experiment, &cfg, out_dir.clone(), seed_override, workers, resume)?;
    eprintln!(
        "done: {} (results: {}, summary: {})",
        kind,
        ctx.results_path().display(),
        ctx.summary_path().display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

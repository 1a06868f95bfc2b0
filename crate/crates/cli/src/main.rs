//! Config-driven experiment runner.
//!
//! Exit status: 0 when every certificate passes, 1 on a failed certificate or numerical error,
//! 2 on an invalid config or unreadable trajectory input.

mod commands;
mod config;
mod ingest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use hardyliou::certify::Check;
use serde::Serialize;

use commands::{Command, Outcome, RunError};
use config::{Diagnostics, ExperimentConfig, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "hardyliou",
    version,
    about = "Run a Hardy-space operator experiment from a JSON config"
)]
struct Cli {
    command: Command,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Directory for the report and CSV tables.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Serialize)]
struct Certificate<'a> {
    #[serde(flatten)]
    check: &'a Check,
    status: &'static str,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: u32,
    command: &'static str,
    config: &'a ExperimentConfig,
    results: &'a serde_json::Value,
    certificates: Vec<Certificate<'a>>,
    files: Vec<&'a str>,
    status: &'static str,
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn configure_threads() -> Result<(), Diagnostics> {
    let Ok(value) = std::env::var("HARDYLIOU_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Diagnostics(vec![format!(
                "HARDYLIOU_THREADS: expected a positive integer, found {value:?}"
            )])
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Diagnostics(vec![format!("HARDYLIOU_THREADS: {e}")]))
}

fn load(path: &Path) -> Result<ExperimentConfig, Diagnostics> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Diagnostics(vec![format!("config {}: {e}", path.display())]))?;
    ExperimentConfig::parse(&text)
}

fn write_outputs(cli: &Cli, cfg: &ExperimentConfig, outcome: &Outcome) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(&cli.out)?;
    for (name, bytes) in &outcome.files {
        std::fs::write(cli.out.join(name), bytes)?;
    }
    let report = Report {
        schema: SCHEMA_VERSION,
        command: cli.command.name(),
        config: cfg,
        results: &outcome.results,
        certificates: outcome
            .checks
            .iter()
            .map(|c| Certificate {
                check: c,
                status: status(c.passed()),
            })
            .collect(),
        files: outcome.files.iter().map(|(n, _)| n.as_str()).collect(),
        status: status(outcome.checks.iter().all(Check::passed)),
    };
    let name = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", cli.command.name())));
    let path = cli.out.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    bytes.push(b'\n');
    std::fs::write(&path, bytes)?;
    Ok(path)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(d) = configure_threads() {
        eprintln!("invalid environment:\n{d}");
        return ExitCode::from(2);
    }
    let cfg = match load(&cli.config) {
        Ok(c) => c,
        Err(d) => {
            eprintln!("invalid config:\n{d}");
            return ExitCode::from(2);
        }
    };
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let outcome = match commands::run(cli.command, &cfg, base) {
        Ok(o) => o,
        Err(e @ (RunError::Config(_) | RunError::Ingest(_))) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e @ RunError::Numerical(_)) => {
            eprintln!("numerical error: {e}");
            return ExitCode::from(1);
        }
    };
    let path = match write_outputs(&cli, &cfg, &outcome) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot write report: {e}");
            return ExitCode::from(1);
        }
    };
    let failed: Vec<&Check> = outcome.checks.iter().filter(|c| !c.passed()).collect();
    for c in &outcome.checks {
        println!("[{}] {c}", status(c.passed()));
    }
    println!("report: {}", path.display());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        for c in failed {
            eprintln!("certificate failed: {c} ({})", c.formula);
        }
        ExitCode::from(1)
    }
}

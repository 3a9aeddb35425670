//! Command-line front end for the simulation harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use unibandit::harness::{
    self, diagnose, oracle_check, oracle_check_all, output_dir, parse_value, run, sweep,
    write_json, write_run_outputs, ExperimentConfig,
};
use unibandit::Error;

#[derive(Parser)]
#[command(name = "unibandit", version, about = "Universal contextual bandit simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all replications of an experiment; writes summary.json and traces.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config; UNIBANDIT_OUTPUT_DIR wins over both).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Process-class diagnostics of the configured process or trace file.
    Diagnose {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a registered oracle scenario, or `all`.
    OracleCheck {
        scenario: String,
        /// Monte-Carlo draws for the estimator scenarios.
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment once per value of a config parameter.
    Sweep {
        config: PathBuf,
        /// Dot-separated config path, e.g. `horizon` or `rule.delta_override`.
        #[arg(long)]
        param: String,
        /// Comma-separated values, or a JSON array.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn pick_dir(cli_out: Option<PathBuf>, config: Option<&ExperimentConfig>) -> PathBuf {
    if std::env::var_os(harness::OUTPUT_DIR_ENV).is_some_and(|d| !d.is_empty()) {
        return output_dir(config);
    }
    cli_out.unwrap_or_else(|| output_dir(config))
}

fn parse_values(text: &str) -> Vec<Value> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Array(items)) => items,
        _ => text.split(',').map(|v| parse_value(v.trim())).collect(),
    }
}

fn paths(written: &[PathBuf]) -> Vec<String> {
    written.iter().map(|p| p.display().to_string()).collect()
}

fn load(path: &Path) -> Result<ExperimentConfig, Error> {
    ExperimentConfig::from_file(path)
}

/// Returns the stdout record and whether the command succeeded.
fn execute(cli: Cli) -> Result<(Value, bool), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let config = load(&config)?;
            let (summary, traced) = run(&config)?;
            let dir = pick_dir(out, Some(&config));
            let written = write_run_outputs(&dir, &summary, &traced)?;
            let last = summary.grid.last();
            Ok((
                json!({
                    "command": "run",
                    "rule": summary.rule,
                    "horizon": summary.horizon,
                    "replications": summary.replications,
                    "final_cumulative_regret": last.map(|g| g.cumulative_regret.mean),
                    "final_per_round_regret": last.map(|g| g.per_round_regret.mean),
                    "written": paths(&written),
                }),
                true,
            ))
        }
        Command::Diagnose { config, out } => {
            let config = load(&config)?;
            let report = diagnose(&config)?;
            let dir = pick_dir(out, Some(&config));
            let path = write_json(&dir, "diagnose.json", &report)?;
            Ok((
                json!({
                    "command": "diagnose",
                    "horizon": report.horizon,
                    "distinct_cell_tail_max": report.distinct_cell_tail_max,
                    "infrequent_mass": report.infrequent_mass,
                    "written": [path.display().to_string()],
                }),
                true,
            ))
        }
        Command::OracleCheck {
            scenario,
            draws,
            out,
        } => {
            let reports = if scenario == "all" {
                oracle_check_all(draws)?
            } else {
                vec![oracle_check(&scenario, draws)?]
            };
            let passed = reports.iter().all(|r| r.passed);
            let dir = pick_dir(out, None);
            let path = write_json(&dir, "oracle_check.json", &reports)?;
            let results: Vec<Value> = reports
                .iter()
                .map(|r| json!({"scenario": r.scenario, "passed": r.passed}))
                .collect();
            Ok((
                json!({
                    "command": "oracle-check",
                    "passed": passed,
                    "results": results,
                    "written": [path.display().to_string()],
                }),
                passed,
            ))
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let config = load(&config)?;
            let report = sweep(&config, &param, &parse_values(&values))?;
            let dir = pick_dir(out, Some(&config));
            let path = write_json(&dir, "sweep.json", &report)?;
            let finals: Vec<Value> = report
                .points
                .iter()
                .map(|p| {
                    json!({
                        "value": p.value,
                        "final_per_round_regret": p.summary.grid.last().map(|g| g.per_round_regret.mean),
                    })
                })
                .collect();
            Ok((
                json!({
                    "command": "sweep",
                    "param": report.param,
                    "points": finals,
                    "written": [path.display().to_string()],
                }),
                true,
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok((record, ok)) => {
            println!("{record}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            ExitCode::from(2)
        }
    }
}

//! Experiment orchestration: configs, seeded replications, regret
//! summaries, traces, process diagnostics, oracle checks and sweeps.

mod config;
mod diagnose;
mod oracle;
mod run;
mod sweep;

use std::path::{Path, PathBuf};

pub use config::{
    DiagnosticsSpec, ExperimentConfig, OutputSpec, RegretMode, RuleSpec, CONFIG_VERSION,
};
pub use diagnose::{diagnose, diagnose_report, diagnose_trace, CurvePoint, DedupSize, DiagnoseReport};
pub use oracle::{
    expinf_schedule_check, ht_expected, ht_scripted_estimates, oracle_check, oracle_check_all,
    Check, OracleReport, SCENARIOS,
};
pub use run::{
    build_learner, build_model, replication_seed, run, run_replication, simulate, summarize,
    write_trace_csv, GridPoint, ReplicationResult, ReplicationSummary, RoundTypes, RunSummary,
    Stat, TraceRecord, TRACE_HEADER,
};
pub use sweep::{parse_value, set_path, sweep, with_param, SweepPoint, SweepReport};

use crate::error::Result;

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "UNIBANDIT_OUTPUT_DIR";

/// Output directory: the environment override, then the config, then `.`.
pub fn output_dir(config: Option<&ExperimentConfig>) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    config
        .and_then(|c| c.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `summary.json` and one `trace_<r>.csv` per traced replication.
/// Returns the written paths.
pub fn write_run_outputs(
    dir: &Path,
    summary: &RunSummary,
    traced: &[ReplicationResult],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let path = dir.join("summary.json");
    std::fs::write(&path, summary.to_json()? + "\n")?;
    written.push(path);
    for r in traced {
        if let Some(records) = &r.trace {
            let path = dir.join(format!("trace_{}.csv", r.index));
            write_trace_csv(records, std::fs::File::create(&path)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes a JSON document to `dir/name`.
pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(path)
}

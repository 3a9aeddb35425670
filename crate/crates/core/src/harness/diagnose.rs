use serde::{Deserialize, Serialize};

use crate::domain::ProcessTrace;
use crate::error::Result;
use crate::processes::{
    dedup_times, distinct_cell_curve, generate, geometric_grid, infrequent_mass, read_trace_file,
};
use crate::rng::{tag, SeededRng};

use super::config::ExperimentConfig;
use super::run::replication_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupSize {
    pub m: u64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub ratio: f64,
}

/// Process-class statistics of one trace. Curves and tail maxima are
/// finite-horizon evidence only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub horizon: u64,
    pub distinct_contexts: usize,
    pub dedup: Vec<DedupSize>,
    pub distinct_cell_curve: Vec<CurvePoint>,
    /// Max distinct-cell ratio over grid points in the second half of the horizon.
    pub distinct_cell_tail_max: f64,
    pub infrequent_mass: f64,
}

/// The trace analysed by `diagnose`: the configured trace file, or the
/// process of replication 0.
pub fn diagnose_trace(config: &ExperimentConfig) -> Result<ProcessTrace> {
    match &config.diagnostics.trace {
        Some(path) => read_trace_file(path),
        None => {
            let seed = replication_seed(config.seed, 0);
            generate(
                &config.process,
                config.horizon,
                SeededRng::substream(seed, &[tag::PROCESS]),
            )
        }
    }
}

pub fn diagnose(config: &ExperimentConfig) -> Result<DiagnoseReport> {
    let trace = diagnose_trace(config)?;
    diagnose_report(config, &trace)
}

pub fn diagnose_report(config: &ExperimentConfig, trace: &ProcessTrace) -> Result<DiagnoseReport> {
    let d = &config.diagnostics;
    let horizon = trace.len() as u64;
    let ms = if d.multiplicities.is_empty() {
        geometric_grid(horizon.max(1))
            .into_iter()
            .filter(|m| m.is_power_of_two())
            .collect()
    } else {
        d.multiplicities.clone()
    };
    let dedup = ms
        .iter()
        .map(|&m| Ok(DedupSize { m, size: dedup_times(trace, m)?.len() }))
        .collect::<Result<Vec<_>>>()?;
    let grid = if config.grid.is_empty() || config.diagnostics.trace.is_some() {
        geometric_grid(horizon)
    } else {
        config.grid()
    };
    let curve: Vec<CurvePoint> = distinct_cell_curve(trace, &d.partition, &grid)?
        .into_iter()
        .map(|(t, ratio)| CurvePoint { t, ratio })
        .collect();
    let tail = curve
        .iter()
        .filter(|c| 2 * c.t >= horizon)
        .map(|c| c.ratio)
        .fold(0.0, f64::max);
    let distinct = trace.ids().collect::<std::collections::HashSet<_>>().len();
    Ok(DiagnoseReport {
        horizon,
        distinct_contexts: distinct,
        dedup,
        distinct_cell_curve: curve,
        distinct_cell_tail_max: tail,
        infrequent_mass: infrequent_mass(trace, &d.partition, &d.thresholds)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(process: serde_json::Value) -> ExperimentConfig {
        ExperimentConfig::from_json(
            &serde_json::json!({
                "version": 1,
                "process": process,
                "actions": {"kind": "finite", "size": 2},
                "mechanism": {"kind": "needle", "targets": {"kind": "hashed"}},
                "rule": {"kind": "exp3"},
                "horizon": 10000
            })
            .to_string(),
        )
        .unwrap()
    }

    #[test]
    fn walk_report() {
        let r = diagnose(&config(serde_json::json!({"kind": "deterministic_walk"}))).unwrap();
        assert!(r.distinct_cell_curve.iter().all(|c| c.ratio == 1.0));
        assert!(r.dedup.iter().all(|d| d.size == 10000));
        assert_eq!(r.infrequent_mass, 1.0);
    }

    #[test]
    fn iid_finite_report() {
        let r = diagnose(&config(
            serde_json::json!({"kind": "iid_finite", "weights": [0.2, 0.2, 0.2, 0.2, 0.2]}),
        ))
        .unwrap();
        let last = r.distinct_cell_curve.last().unwrap();
        assert_eq!(last.t, 10000);
        assert!(last.ratio <= 0.0005);
        assert!(r.infrequent_mass <= 5.0 / 10000.0);
        assert_eq!(r.dedup[0], DedupSize { m: 1, size: 5 });
    }

    #[test]
    fn unreadable_trace_errors() {
        let mut c = config(serde_json::json!({"kind": "deterministic_walk"}));
        c.diagnostics.trace = Some("/nonexistent/trace.tsv".into());
        assert!(diagnose(&c).is_err());
    }
}

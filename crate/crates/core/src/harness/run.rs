use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ActionId, ContextPoint};
use crate::error::Result;
use crate::learner::{Learner, Regime, RoundInfo};
use crate::processes::ProcessGenerator;
use crate::rewards::RewardModel;
use crate::rng::{derive_seed, tag, SeededRng};
use crate::universal::UniversalRule;
use crate::variants::{
    uc_net_rule, CountableRule, Exp3IxRule, Exp3Rule, ExpInfRule, OracleRule, UnboundedRule,
};

use super::config::{ExperimentConfig, RegretMode, RuleSpec};

/// Root seed of replication `r`.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[tag::REPLICATION, r as u64])
}

/// Builds the configured learner for one replication.
pub fn build_learner(
    config: &ExperimentConfig,
    model: Arc<RewardModel>,
    seed: u64,
) -> Result<Box<dyn Learner>> {
    let k = config.actions.len();
    let learner_seed = derive_seed(seed, &[tag::LEARNER]);
    Ok(match &config.rule {
        RuleSpec::Exp3 => Box::new(Exp3Rule::new(k, learner_seed)?),
        RuleSpec::Exp3ix => Box::new(Exp3IxRule::new(k, learner_seed)?),
        RuleSpec::Expinf => Box::new(ExpInfRule::new(k, learner_seed)?),
        RuleSpec::UniversalFinite { domain } => {
            Box::new(UniversalRule::new(k, domain.clone(), learner_seed)?)
        }
        RuleSpec::CountableRule { domain } => {
            Box::new(CountableRule::new(k, domain.clone(), learner_seed)?)
        }
        RuleSpec::ContinuousRule { domain } => Box::new(CountableRule::continuous(
            &config.actions,
            domain.clone(),
            learner_seed,
        )?),
        RuleSpec::UcNetRule {
            domain,
            delta_override,
        } => Box::new(uc_net_rule(
            &config.actions,
            domain.clone(),
            learner_seed,
            *delta_override,
        )?),
        RuleSpec::UnboundedRule { scale } => Box::new(UnboundedRule::new(k, *scale, learner_seed)?),
        RuleSpec::Oracle => Box::new(OracleRule::new(move |x| model.optimal_action(x))),
    })
}

/// Reward model of one replication (hashed targets use the replication seed).
pub fn build_model(config: &ExperimentConfig, seed: u64) -> Result<RewardModel> {
    RewardModel::new(
        config.actions.clone(),
        config.mechanism.clone(),
        derive_seed(seed, &[tag::REWARD, 1]),
    )
}

/// One round of a replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub context_id: u64,
    pub info: RoundInfo,
    pub action: ActionId,
    pub reward: f64,
    pub cum_regret: f64,
}

/// Round counts by type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundTypes {
    pub plain: u64,
    pub initial: u64,
    pub explore0: u64,
    pub explore1: u64,
    pub exploit: u64,
    pub exploit_strategy0: u64,
    pub exploit_strategy1: u64,
}

impl RoundTypes {
    fn add(&mut self, regime: Regime) {
        match regime {
            Regime::Plain => self.plain += 1,
            Regime::Initial => self.initial += 1,
            Regime::Explore0 => self.explore0 += 1,
            Regime::Explore1 => self.explore1 += 1,
            Regime::ExploitStrategy0 => {
                self.exploit += 1;
                self.exploit_strategy0 += 1
            }
            Regime::ExploitStrategy1 => {
                self.exploit += 1;
                self.exploit_strategy1 += 1
            }
        }
    }

    /// plain + initial + explore0 + explore1 + exploit.
    pub fn total(&self) -> u64 {
        self.plain + self.initial + self.explore0 + self.explore1 + self.exploit
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub index: usize,
    pub seed: u64,
    /// Cumulative regret at each grid point.
    pub regret: Vec<f64>,
    /// Round types at each grid point.
    pub round_types: Vec<RoundTypes>,
    /// Rounds per category at the horizon.
    pub categories: BTreeMap<u32, u64>,
    #[serde(skip)]
    pub trace: Option<Vec<TraceRecord>>,
}

/// Drives `learner` for `horizon` rounds.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    learner: &mut dyn Learner,
    process: &mut ProcessGenerator,
    model: &RewardModel,
    horizon: u64,
    grid: &[u64],
    mode: RegretMode,
    seed: u64,
    record: bool,
) -> Result<(Vec<f64>, Vec<RoundTypes>, BTreeMap<u32, u64>, Option<Vec<TraceRecord>>)> {
    let mut reward_rng = SeededRng::substream(seed, &[tag::REWARD]);
    let mut oracle_rng = SeededRng::substream(seed, &[tag::ORACLE]);
    let partition = model.mechanism().partition().clone();
    // pi* and its mean depend only on the mechanism cell
    let mut best: HashMap<u64, (ActionId, f64)> = HashMap::new();
    let mut cum = 0.0;
    let mut types = RoundTypes::default();
    let mut categories: BTreeMap<u32, u64> = BTreeMap::new();
    let mut regret = Vec::with_capacity(grid.len());
    let mut type_curve = Vec::with_capacity(grid.len());
    let mut trace = record.then(|| Vec::with_capacity(horizon as usize));
    let mut next_grid = grid.iter().peekable();
    for t in 1..=horizon {
        let x: ContextPoint = process.next_context()?;
        let action = learner.select(t, &x)?;
        let info = learner.round_info();
        let sample = model.sample(action, &x, &mut reward_rng)?;
        learner.feed(sample)?;
        let cell = partition.cell(&x)?;
        let (star, star_mean) = match best.get(&cell) {
            Some(v) => *v,
            None => {
                let a = model.optimal_action(&x)?;
                let v = (a, model.mean(a, &x)?);
                best.insert(cell, v);
                v
            }
        };
        cum += match mode {
            RegretMode::Pseudo => star_mean - model.mean(action, &x)?,
            RegretMode::Realized => model.sample(star, &x, &mut oracle_rng)?.value() - sample.value(),
        };
        types.add(info.regime);
        if let Some(p) = info.category {
            *categories.entry(p).or_insert(0) += 1;
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(TraceRecord {
                t,
                context_id: x.id,
                info,
                action,
                reward: sample.value(),
                cum_regret: cum,
            });
        }
        while next_grid.peek() == Some(&&t) {
            regret.push(cum);
            type_curve.push(types);
            next_grid.next();
        }
    }
    Ok((regret, type_curve, categories, trace))
}

/// Runs replication `r` of `config`.
pub fn run_replication(config: &ExperimentConfig, r: usize, record: bool) -> Result<ReplicationResult> {
    let seed = replication_seed(config.seed, r);
    let model = Arc::new(build_model(config, seed)?);
    let mut learner = build_learner(config, Arc::clone(&model), seed)?;
    let mut process = ProcessGenerator::new(
        config.process.clone(),
        SeededRng::substream(seed, &[tag::PROCESS]),
    )?;
    let grid = config.grid();
    let (regret, round_types, categories, trace) = simulate(
        learner.as_mut(),
        &mut process,
        &model,
        config.horizon,
        &grid,
        config.regret,
        seed,
        record,
    )?;
    Ok(ReplicationResult {
        index: r,
        seed,
        regret,
        round_types,
        categories,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    fn of(xs: impl Iterator<Item = f64> + Clone) -> Stat {
        let n = xs.clone().count() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        let var = if n > 1.0 {
            xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Stat {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Aggregates at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub t: u64,
    pub cumulative_regret: Stat,
    pub per_round_regret: Stat,
    /// Round-type counts summed over replications.
    pub round_types: RoundTypes,
}

/// Per-replication final values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub index: usize,
    pub seed: u64,
    pub cumulative_regret: f64,
    pub round_types: RoundTypes,
    pub categories: BTreeMap<u32, u64>,
}

/// Aggregated outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rule: String,
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    pub regret_mode: RegretMode,
    pub grid: Vec<GridPoint>,
    /// Rounds per category at the horizon, summed over replications.
    pub categories: BTreeMap<u32, u64>,
    pub per_replication: Vec<ReplicationSummary>,
}

impl RunSummary {
    pub fn at(&self, t: u64) -> Option<&GridPoint> {
        self.grid.iter().find(|g| g.t == t)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Combines replication results, in index order.
pub fn summarize(config: &ExperimentConfig, mut results: Vec<ReplicationResult>) -> RunSummary {
    results.sort_by_key(|r| r.index);
    let grid = config.grid();
    let points = grid
        .iter()
        .enumerate()
        .map(|(g, &t)| {
            let mut types = RoundTypes::default();
            for r in &results {
                let x = r.round_types[g];
                types.plain += x.plain;
                types.initial += x.initial;
                types.explore0 += x.explore0;
                types.explore1 += x.explore1;
                types.exploit += x.exploit;
                types.exploit_strategy0 += x.exploit_strategy0;
                types.exploit_strategy1 += x.exploit_strategy1;
            }
            GridPoint {
                t,
                cumulative_regret: Stat::of(results.iter().map(move |r| r.regret[g])),
                per_round_regret: Stat::of(results.iter().map(move |r| r.regret[g] / t as f64)),
                round_types: types,
            }
        })
        .collect();
    let mut categories = BTreeMap::new();
    for r in &results {
        for (p, n) in &r.categories {
            *categories.entry(*p).or_insert(0) += n;
        }
    }
    RunSummary {
        rule: config.rule.name().to_string(),
        horizon: config.horizon,
        replications: config.replications,
        seed: config.seed,
        regret_mode: config.regret,
        grid: points,
        categories,
        per_replication: results
            .iter()
            .map(|r| ReplicationSummary {
                index: r.index,
                seed: r.seed,
                cumulative_regret: *r.regret.last().unwrap_or(&0.0),
                round_types: *r.round_types.last().unwrap_or(&RoundTypes::default()),
                categories: r.categories.clone(),
            })
            .collect(),
    }
}

/// Runs every replication in parallel and aggregates deterministically.
/// Traces are returned for the replications listed in `output.traces`.
pub fn run(config: &ExperimentConfig) -> Result<(RunSummary, Vec<ReplicationResult>)> {
    config.validate()?;
    let results: Vec<ReplicationResult> = (0..config.replications)
        .into_par_iter()
        .map(|r| run_replication(config, r, config.output.traces.contains(&r)))
        .collect::<Result<_>>()?;
    let traced = results.iter().filter(|r| r.trace.is_some()).cloned().collect();
    Ok((summarize(config, results), traced))
}

/// Trace CSV header.
pub const TRACE_HEADER: &str =
    "t,context_id,category,period,purpose,regime,strategy,action_id,reward,cum_pseudo_regret";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_trace_csv(records: &[TraceRecord], out: impl Write) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.context_id,
            opt(r.info.category),
            opt(r.info.period),
            opt(r.info.purpose.map(|p| p.code())),
            r.info.regime.as_str(),
            opt(r.info.strategy),
            r.action.0,
            r.reward,
            r.cum_regret
        )?;
    }
    w.flush()?;
    Ok(())
}

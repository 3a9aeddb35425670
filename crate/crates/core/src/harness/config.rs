use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{ActionSpace, Partition};
use crate::error::{Error, Result};
use crate::policy_net::ContextDomain;
use crate::processes::{ProcessSpec, Thresholds};
use crate::rewards::Mechanism;
use crate::variants::RewardScale;

/// Current config schema version.
pub const CONFIG_VERSION: u32 = 1;

/// Learning rule and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Exp3,
    Exp3ix,
    Expinf,
    UniversalFinite {
        #[serde(default)]
        domain: ContextDomain,
    },
    CountableRule {
        #[serde(default)]
        domain: ContextDomain,
    },
    ContinuousRule {
        #[serde(default)]
        domain: ContextDomain,
    },
    UcNetRule {
        #[serde(default)]
        domain: ContextDomain,
        #[serde(default)]
        delta_override: Option<f64>,
    },
    UnboundedRule { scale: RewardScale },
    /// Plays the optimal policy of the mechanism.
    Oracle,
}

impl RuleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            RuleSpec::Exp3 => "exp3",
            RuleSpec::Exp3ix => "exp3ix",
            RuleSpec::Expinf => "expinf",
            RuleSpec::UniversalFinite { .. } => "universal_finite",
            RuleSpec::CountableRule { .. } => "countable_rule",
            RuleSpec::ContinuousRule { .. } => "continuous_rule",
            RuleSpec::UcNetRule { .. } => "uc_net_rule",
            RuleSpec::UnboundedRule { .. } => "unbounded_rule",
            RuleSpec::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegretMode {
    /// Differences of exact mean rewards.
    #[default]
    Pseudo,
    /// Differences of realized rewards, the optimal action's reward drawn
    /// from an independent stream.
    Realized,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; overridden by `UNIBANDIT_OUTPUT_DIR`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Replications whose per-round trace is written as CSV.
    #[serde(default)]
    pub traces: Vec<usize>,
}

/// Settings of the `diagnose` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    #[serde(default)]
    pub partition: Partition,
    #[serde(default = "default_thresholds")]
    pub thresholds: Thresholds,
    /// Dedup multiplicities; powers of two up to the horizon when empty.
    #[serde(default)]
    pub multiplicities: Vec<u64>,
    /// Analyse this trace file instead of generating the process.
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

fn default_thresholds() -> Thresholds {
    Thresholds::Uniform { n: 1 }
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        DiagnosticsSpec {
            partition: Partition::Identity,
            thresholds: default_thresholds(),
            multiplicities: Vec::new(),
            trace: None,
        }
    }
}

fn default_replications() -> usize {
    1
}

/// A full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub process: ProcessSpec,
    pub actions: ActionSpace,
    pub mechanism: Mechanism,
    pub rule: RuleSpec,
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Evaluation rounds; powers of two and the horizon when empty.
    #[serde(default)]
    pub grid: Vec<u64>,
    #[serde(default)]
    pub regret: RegretMode,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Sorted, deduplicated evaluation grid.
    pub fn grid(&self) -> Vec<u64> {
        let mut grid = if self.grid.is_empty() {
            crate::processes::geometric_grid(self.horizon)
        } else {
            self.grid.clone()
        };
        grid.sort_unstable();
        grid.dedup();
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if let Some(t) = self.grid.iter().find(|t| **t < 1 || **t > self.horizon) {
            return Err(Error::Config(format!("grid point {t} outside [1, {}]", self.horizon)));
        }
        if let Some(r) = self.output.traces.iter().find(|r| **r >= self.replications) {
            return Err(Error::Config(format!("trace replication {r} out of range")));
        }
        self.process.validate()?;
        self.actions.validate()?;
        let metric = matches!(self.actions, ActionSpace::MetricCandidates { .. });
        let countable = matches!(self.actions, ActionSpace::CountablePrefix { .. });
        match &self.rule {
            RuleSpec::Exp3 | RuleSpec::Exp3ix | RuleSpec::UniversalFinite { .. } if countable => {
                return Err(Error::Config(format!(
                    "{} needs a finite action set, not a countable prefix",
                    self.rule.name()
                )));
            }
            RuleSpec::ContinuousRule { .. } | RuleSpec::UcNetRule { .. } if !metric => {
                return Err(Error::Config(format!(
                    "{} needs a metric_candidates action space",
                    self.rule.name()
                )));
            }
            _ => {}
        }
        let tolerates_unbounded = matches!(self.rule, RuleSpec::UnboundedRule { .. } | RuleSpec::Oracle);
        if self.mechanism.is_unbounded() && !tolerates_unbounded {
            return Err(Error::Config(format!(
                "{} needs rewards in [0, 1]; use unbounded_rule",
                self.rule.name()
            )));
        }
        Ok(())
    }
}

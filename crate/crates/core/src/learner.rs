//! The learner contract shared by every learning rule.

use serde::{Deserialize, Serialize};

use crate::domain::{ActionId, ContextPoint, RewardSample};
use crate::error::Result;

/// A round's role under the universal rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Explore0,
    Explore1,
    Exploit,
}

impl Purpose {
    pub fn code(self) -> u8 {
        match self {
            Purpose::Explore0 => 0,
            Purpose::Explore1 => 1,
            Purpose::Exploit => 2,
        }
    }
}

/// Which code path produced a round's action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Rules without purpose machinery.
    Plain,
    /// Per-instance EXP3 before 2^{32p}.
    Initial,
    Explore0,
    Explore1,
    ExploitStrategy0,
    ExploitStrategy1,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::Plain,
        Regime::Initial,
        Regime::Explore0,
        Regime::Explore1,
        Regime::ExploitStrategy0,
        Regime::ExploitStrategy1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Plain => "plain",
            Regime::Initial => "initial",
            Regime::Explore0 => "explore0",
            Regime::Explore1 => "explore1",
            Regime::ExploitStrategy0 => "exploit_strategy0",
            Regime::ExploitStrategy1 => "exploit_strategy1",
        }
    }
}

/// Trace tags of the most recent round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundInfo {
    pub category: Option<u32>,
    pub period: Option<u64>,
    pub purpose: Option<Purpose>,
    pub regime: Regime,
    /// Strategy played (0 or 1) when the round followed one.
    pub strategy: Option<u8>,
}

impl Default for RoundInfo {
    fn default() -> Self {
        RoundInfo {
            category: None,
            period: None,
            purpose: None,
            regime: Regime::Plain,
            strategy: None,
        }
    }
}

/// A learning rule as a state machine: `select` at round t sees only the
/// history before t plus X_t, and `feed` must follow each `select` exactly once.
pub trait Learner: Send {
    fn name(&self) -> &'static str;

    /// Chooses the action for round `t` (1-based, consecutive).
    fn select(&mut self, t: u64, context: &ContextPoint) -> Result<ActionId>;

    /// Delivers the reward of the action chosen by the last `select`.
    fn feed(&mut self, reward: RewardSample) -> Result<()>;

    fn round_info(&self) -> RoundInfo {
        RoundInfo::default()
    }
}

/// Round-sequencing guard shared by the rule implementations.
#[derive(Debug, Clone, Default)]
pub(crate) struct RoundClock {
    last_t: u64,
    pending: bool,
}

impl RoundClock {
    pub(crate) fn begin(&mut self, t: u64) -> Result<()> {
        use crate::error::Error;
        if self.pending {
            return Err(Error::Protocol(format!(
                "select at round {t} while round {} awaits its reward",
                self.last_t
            )));
        }
        if t != self.last_t + 1 {
            return Err(Error::Protocol(format!(
                "round {t} out of order (expected {})",
                self.last_t + 1
            )));
        }
        self.last_t = t;
        self.pending = true;
        Ok(())
    }

    pub(crate) fn end(&mut self) -> Result<u64> {
        if !self.pending {
            return Err(crate::error::Error::Protocol(
                "feed without a pending select".into(),
            ));
        }
        self.pending = false;
        Ok(self.last_t)
    }

    pub(crate) fn last(&self) -> u64 {
        self.last_t
    }
}

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bandits::ExpInf;
use crate::domain::{ActionId, ContextPoint, RewardSample};
use crate::error::{Error, Result};
use crate::learner::{Learner, RoundClock, RoundInfo};
use crate::rng::{derive_seed, tag};

/// How raw nonnegative rewards are mapped into [0, 1] for the inner learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardScale {
    /// min(r / bound, 1).
    Fixed { bound: f64 },
    /// Divide by the running maximum reward, refreshed only when a context's
    /// EXPINF starts a new period.
    Adaptive,
}

#[derive(Debug, Clone)]
struct ContextState {
    expinf: ExpInf,
    scale: f64,
}

/// One EXPINF per distinct context over the constant experts a_1, a_2, ...
#[derive(Debug, Clone)]
pub struct UnboundedRule {
    seed: u64,
    experts: Vec<ActionId>,
    scale: RewardScale,
    states: HashMap<u64, ContextState>,
    running_max: f64,
    clock: RoundClock,
    pending: Option<u64>,
    info: RoundInfo,
}

impl UnboundedRule {
    pub fn new(actions: usize, scale: RewardScale, seed: u64) -> Result<Self> {
        if actions == 0 {
            return Err(Error::InvalidArgument("unbounded rule without actions".into()));
        }
        if let RewardScale::Fixed { bound } = scale {
            if !(bound > 0.0) || !bound.is_finite() {
                return Err(Error::Config(format!("reward bound {bound} must be positive")));
            }
        }
        Ok(UnboundedRule {
            seed,
            experts: (0..actions).map(ActionId).collect(),
            scale,
            states: HashMap::new(),
            running_max: 0.0,
            clock: RoundClock::default(),
            pending: None,
            info: RoundInfo::default(),
        })
    }

    /// Number of EXPINF instances created so far.
    pub fn instances(&self) -> usize {
        self.states.len()
    }

    pub fn expinf(&self, context: &ContextPoint) -> Option<&ExpInf> {
        self.states.get(&context.id).map(|s| &s.expinf)
    }

    fn initial_scale(&self) -> f64 {
        match self.scale {
            RewardScale::Fixed { bound } => bound,
            RewardScale::Adaptive if self.running_max > 0.0 => self.running_max,
            RewardScale::Adaptive => 1.0,
        }
    }
}

impl Learner for UnboundedRule {
    fn name(&self) -> &'static str {
        "unbounded_rule"
    }

    fn select(&mut self, t: u64, context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        let scale = self.initial_scale();
        let cap = self.experts.len();
        let seed = derive_seed(self.seed, &[tag::LEARNER, 4, context.id]);
        let state = match self.states.entry(context.id) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(ContextState {
                expinf: ExpInf::new(Some(cap), seed)?,
                scale,
            }),
        };
        let (_, end) = state.expinf.period_bounds();
        if state.expinf.rounds() + 1 > end {
            state.scale = scale;
        }
        let n = state.expinf.experts_needed();
        let (_, action) = state.expinf.select(&self.experts[..n])?;
        self.pending = Some(context.id);
        self.info = RoundInfo {
            period: Some(state.expinf.current_period()),
            ..RoundInfo::default()
        };
        Ok(action)
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.value();
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::RewardOutOfRange {
                value: r,
                range: "[0, inf)",
            });
        }
        self.clock.end()?;
        let id = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("unbounded rule feed without select".into()))?;
        let state = self
            .states
            .get_mut(&id)
            .ok_or_else(|| Error::Protocol(format!("no state for context {id}")))?;
        state.expinf.update((r / state.scale).min(1.0))?;
        self.running_max = self.running_max.max(r);
        Ok(())
    }

    fn round_info(&self) -> RoundInfo {
        self.info
    }
}

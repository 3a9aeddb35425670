use crate::bandits::ExpInf;
use crate::domain::{ActionId, ActionSpace, ContextPoint, RewardSample};
use crate::error::{Error, Result};
use crate::learner::{Learner, RoundClock, RoundInfo};
use crate::policy_net::{ContextDomain, PolicyFamily};
use crate::rng::{derive_seed, tag};

/// EXPINF over the enumerated policy family: in period i, expert l proposes
/// pi^l(X_t) for l = 1..=i.
#[derive(Debug, Clone)]
pub struct CountableRule {
    name: &'static str,
    family: PolicyFamily,
    expinf: ExpInf,
    clock: RoundClock,
    proposals: Vec<ActionId>,
}

impl CountableRule {
    /// Policies over `actions` enumerated actions of a countable space.
    pub fn new(actions: usize, domain: ContextDomain, seed: u64) -> Result<Self> {
        Self::named("countable_rule", actions, domain, seed)
    }

    /// Policies over the candidate list of a metric action space.
    pub fn continuous(space: &ActionSpace, domain: ContextDomain, seed: u64) -> Result<Self> {
        if !matches!(space, ActionSpace::MetricCandidates { .. }) {
            return Err(Error::Config(
                "continuous_rule needs a metric_candidates action space".into(),
            ));
        }
        space.validate()?;
        Self::named("continuous_rule", space.len(), domain, seed)
    }

    fn named(name: &'static str, actions: usize, domain: ContextDomain, seed: u64) -> Result<Self> {
        Ok(CountableRule {
            name,
            family: PolicyFamily::new(domain, actions)?,
            expinf: ExpInf::new(None, derive_seed(seed, &[tag::LEARNER, 3]))?,
            clock: RoundClock::default(),
            proposals: Vec::new(),
        })
    }

    pub fn expinf(&self) -> &ExpInf {
        &self.expinf
    }
}

impl Learner for CountableRule {
    fn name(&self) -> &'static str {
        self.name
    }

    fn select(&mut self, t: u64, context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        let n = self.expinf.experts_needed() as u64;
        self.proposals.clear();
        for l in 1..=n {
            let a = self.family.evaluate(l, context)?;
            self.proposals.push(a);
        }
        let (_, action) = self.expinf.select(&self.proposals)?;
        Ok(action)
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.unit_value()?;
        self.clock.end()?;
        self.expinf.update(r)
    }

    fn round_info(&self) -> RoundInfo {
        RoundInfo {
            period: Some(self.expinf.current_period()),
            ..RoundInfo::default()
        }
    }
}

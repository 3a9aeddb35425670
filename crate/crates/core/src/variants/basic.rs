use crate::bandits::{Exp3, Exp3Ix, ExpInf};
use crate::domain::{ActionId, ContextPoint, RewardSample};
use crate::error::{Error, Result};
use crate::learner::{Learner, RoundClock, RoundInfo};
use crate::rng::{tag, SeededRng};

/// Context-free EXP3 over a finite action list.
#[derive(Debug, Clone)]
pub struct Exp3Rule {
    inner: Exp3,
    clock: RoundClock,
    pending: Option<usize>,
}

impl Exp3Rule {
    pub fn new(actions: usize, seed: u64) -> Result<Self> {
        Ok(Exp3Rule {
            inner: Exp3::new(actions, SeededRng::substream(seed, &[tag::LEARNER, 0]))?,
            clock: RoundClock::default(),
            pending: None,
        })
    }

    pub fn inner(&self) -> &Exp3 {
        &self.inner
    }
}

impl Learner for Exp3Rule {
    fn name(&self) -> &'static str {
        "exp3"
    }

    fn select(&mut self, t: u64, _context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        let (arm, _) = self.inner.select()?;
        self.pending = Some(arm);
        Ok(ActionId(arm))
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.unit_value()?;
        self.clock.end()?;
        let arm = self.pending.take().ok_or_else(|| Error::Protocol("exp3 feed without select".into()))?;
        self.inner.update(arm, r)
    }
}

/// Context-free EXP3.IX over a finite action list.
#[derive(Debug, Clone)]
pub struct Exp3IxRule {
    inner: Exp3Ix,
    clock: RoundClock,
    pending: Option<usize>,
}

impl Exp3IxRule {
    pub fn new(actions: usize, seed: u64) -> Result<Self> {
        Ok(Exp3IxRule {
            inner: Exp3Ix::new(actions, SeededRng::substream(seed, &[tag::LEARNER, 1]))?,
            clock: RoundClock::default(),
            pending: None,
        })
    }

    pub fn inner(&self) -> &Exp3Ix {
        &self.inner
    }
}

impl Learner for Exp3IxRule {
    fn name(&self) -> &'static str {
        "exp3ix"
    }

    fn select(&mut self, t: u64, _context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        let (arm, _) = self.inner.select()?;
        self.pending = Some(arm);
        Ok(ActionId(arm))
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.unit_value()?;
        self.clock.end()?;
        let arm = self.pending.take().ok_or_else(|| Error::Protocol("exp3ix feed without select".into()))?;
        self.inner.update(arm, r)
    }
}

/// Context-free EXPINF over the constant experts a_1, a_2, ...
#[derive(Debug, Clone)]
pub struct ExpInfRule {
    inner: ExpInf,
    clock: RoundClock,
    experts: Vec<ActionId>,
}

impl ExpInfRule {
    pub fn new(actions: usize, seed: u64) -> Result<Self> {
        Ok(ExpInfRule {
            inner: ExpInf::new(Some(actions), derive(seed))?,
            clock: RoundClock::default(),
            experts: (0..actions).map(ActionId).collect(),
        })
    }
}

fn derive(seed: u64) -> u64 {
    crate::rng::derive_seed(seed, &[tag::LEARNER, 2])
}

impl Learner for ExpInfRule {
    fn name(&self) -> &'static str {
        "expinf"
    }

    fn select(&mut self, t: u64, _context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        let n = self.inner.experts_needed();
        let (_, action) = self.inner.select(&self.experts[..n])?;
        Ok(action)
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.unit_value()?;
        self.clock.end()?;
        self.inner.update(r)
    }

    fn round_info(&self) -> RoundInfo {
        RoundInfo {
            period: Some(self.inner.current_period()),
            ..RoundInfo::default()
        }
    }
}

/// Plays a fixed policy, typically the optimal policy of a mechanism.
pub struct OracleRule {
    policy: Box<dyn Fn(&ContextPoint) -> Result<ActionId> + Send>,
    clock: RoundClock,
}

impl std::fmt::Debug for OracleRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleRule").finish_non_exhaustive()
    }
}

impl OracleRule {
    pub fn new(policy: impl Fn(&ContextPoint) -> Result<ActionId> + Send + 'static) -> Self {
        OracleRule {
            policy: Box::new(policy),
            clock: RoundClock::default(),
        }
    }
}

impl Learner for OracleRule {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn select(&mut self, t: u64, context: &ContextPoint) -> Result<ActionId> {
        self.clock.begin(t)?;
        (self.policy)(context)
    }

    fn feed(&mut self, _reward: RewardSample) -> Result<()> {
        self.clock.end().map(|_| ())
    }
}

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::bandits::{Exp3, Exp3Ix};
use crate::domain::{ActionId, ContextPoint, RewardSample};
use crate::error::{Error, Result};
use crate::learner::{Learner, Purpose, Regime, RoundClock, RoundInfo};
use crate::policy_net::{ContextDomain, PolicyFamily};
use crate::rng::{tag, SeededRng};

use super::schedule::{
    category, exploration_probability, explore1_policy_count, floor_log2, in_initial_regime,
    period_of, period_start, seeded_plan_period, strategy0_penalty, strategy0_plan_span,
};

/// Strategy committed to on exploitation rounds of a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Strategy {
    /// Per-instance EXP3.
    Zero,
    /// EXP3.IX over the policy family.
    One,
}

impl Strategy {
    pub fn code(self) -> u8 {
        match self {
            Strategy::Zero => 0,
            Strategy::One => 1,
        }
    }
}

/// Actions strategy 0 may play in each category.
pub trait Strategy0Actions: Send + fmt::Debug {
    fn actions(&mut self, p: u32) -> Result<&[ActionId]>;
}

/// Strategy 0 over the full finite action list, in every category.
#[derive(Debug, Clone)]
pub struct FullActionSet(Vec<ActionId>);

impl FullActionSet {
    pub fn new(actions: usize) -> Self {
        FullActionSet((0..actions).map(ActionId).collect())
    }
}

impl Strategy0Actions for FullActionSet {
    fn actions(&mut self, _p: u32) -> Result<&[ActionId]> {
        Ok(&self.0)
    }
}

/// Memoized purpose of a (category, period, context) triple, together with
/// the round of its first occurrence and that round's exploration probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurposeMemo {
    pub purpose: Purpose,
    pub first_round: u64,
    pub exploration_probability: f64,
}

/// Importance-weighted reward estimates of one (category, period).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Estimators {
    /// R_p^0(q)
    pub strategy0: f64,
    /// R_p^l(q) at index l - 1.
    pub policies: Vec<f64>,
}

impl Estimators {
    /// R_p^l(q); zero for policies never explored.
    pub fn policy(&self, l: u64) -> f64 {
        l.checked_sub(1)
            .and_then(|i| self.policies.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    fn add_policy(&mut self, l: u64, amount: f64) {
        let idx = (l - 1) as usize;
        if self.policies.len() <= idx {
            self.policies.resize(idx + 1, 0.0);
        }
        self.policies[idx] += amount;
    }
}

/// Record of one strategy selection at the end of a period.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyDecision {
    pub category: u32,
    pub period: u64,
    pub estimators: Estimators,
    pub penalty_rate: f64,
    pub period_length: f64,
    pub policy_count: u64,
    /// None when the plan for the next period was already fixed.
    pub chosen: Option<Strategy>,
}

type PeriodKey = (u32, u64);
type InstanceKey = (u32, u64, u64);

#[derive(Debug, Clone, Copy)]
enum Pending {
    Initial { key: (u32, u64), arm: usize },
    Explore0 { key: InstanceKey, arm: usize, weight: f64 },
    Explore1 { key: PeriodKey, policy: u64, weight: f64 },
    Exploit0 { key: InstanceKey, arm: usize },
    Exploit1 { key: PeriodKey, arm: usize },
}

/// The optimistically universal rule for finite action sets.
///
/// Each round is routed by the category p of its context (how often it has
/// occurred) and the period q of category p. Before 2^{32p} category p runs a
/// per-instance EXP3. Afterwards each (p, q, context) draws a purpose once:
/// explore strategy 0, explore strategy 1, or exploit the strategy planned for
/// (p, q). Exploration rounds feed Horvitz-Thompson estimates of both
/// strategies' period rewards, and the plan for later periods is chosen from
/// those estimates when a period ends.
pub struct UniversalRule {
    name: &'static str,
    seed: u64,
    strategy0_actions: Box<dyn Strategy0Actions>,
    policies: PolicyFamily,
    clock: RoundClock,
    occurrences: HashMap<u64, u64>,
    purposes: HashMap<InstanceKey, PurposeMemo>,
    initial: HashMap<(u32, u64), Exp3>,
    strat0: HashMap<InstanceKey, Exp3>,
    strat1: HashMap<PeriodKey, Exp3Ix>,
    estimators: HashMap<PeriodKey, Estimators>,
    plan: BTreeMap<PeriodKey, Strategy>,
    purpose_rng: SeededRng,
    explore1_rng: SeededRng,
    pending: Option<Pending>,
    info: RoundInfo,
    decisions: Vec<StrategyDecision>,
}

impl fmt::Debug for UniversalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UniversalRule")
            .field("name", &self.name)
            .field("seed", &self.seed)
            .field("round", &self.clock.last())
            .field("contexts", &self.occurrences.len())
            .finish()
    }
}

impl UniversalRule {
    /// Universal rule over `actions` finite actions with policies over `domain`.
    pub fn new(actions: usize, domain: ContextDomain, seed: u64) -> Result<Self> {
        Self::with_strategy0_actions(
            "universal_finite",
            Box::new(FullActionSet::new(actions)),
            actions,
            domain,
            seed,
        )
    }

    /// Rule whose strategy 0 plays category-dependent action subsets, while
    /// the policy family ranges over all `policy_actions` actions.
    pub fn with_strategy0_actions(
        name: &'static str,
        strategy0_actions: Box<dyn Strategy0Actions>,
        policy_actions: usize,
        domain: ContextDomain,
        seed: u64,
    ) -> Result<Self> {
        if policy_actions == 0 {
            return Err(Error::InvalidArgument("universal rule without actions".into()));
        }
        Ok(UniversalRule {
            name,
            seed,
            strategy0_actions,
            policies: PolicyFamily::new(domain, policy_actions)?,
            clock: RoundClock::default(),
            occurrences: HashMap::new(),
            purposes: HashMap::new(),
            initial: HashMap::new(),
            strat0: HashMap::new(),
            strat1: HashMap::new(),
            estimators: HashMap::new(),
            plan: BTreeMap::new(),
            purpose_rng: SeededRng::substream(seed, &[tag::PURPOSE]),
            explore1_rng: SeededRng::substream(seed, &[tag::EXPLORE1]),
            pending: None,
            info: RoundInfo::default(),
            decisions: Vec::new(),
        })
    }

    pub fn occurrences(&self, context: &ContextPoint) -> u64 {
        self.occurrences.get(&context.id).copied().unwrap_or(0)
    }

    pub fn purpose_memo(&self, p: u32, q: u64, context: &ContextPoint) -> Option<PurposeMemo> {
        self.purposes.get(&(p, q, context.id)).copied()
    }

    pub fn estimators(&self, p: u32, q: u64) -> Option<&Estimators> {
        self.estimators.get(&(p, q))
    }

    /// P_p(q), including the initial P_p(p 2^{p+5}) = 0.
    pub fn plan(&self, p: u32, q: u64) -> Option<Strategy> {
        self.plan.get(&(p, q)).copied().or_else(|| {
            (seeded_plan_period(p).ok() == Some(q)).then_some(Strategy::Zero)
        })
    }

    /// Strategy selections made so far, in order.
    pub fn decisions(&self) -> &[StrategyDecision] {
        &self.decisions
    }

    /// Number of live per-instance and per-period learners.
    pub fn live_learners(&self) -> usize {
        self.initial.len() + self.strat0.len() + self.strat1.len()
    }

    fn strategy0_learner(&mut self, key: InstanceKey) -> Result<&mut Exp3> {
        let arms = self.strategy0_actions.actions(key.0)?.len();
        let seed = self.seed;
        Ok(self.strat0.entry(key).or_insert_with(|| {
            let rng = SeededRng::substream(seed, &[tag::STRAT0, u64::from(key.0), key.1, key.2]);
            Exp3::new(arms, rng).expect("strategy-0 action set is nonempty")
        }))
    }

    fn ensure_nonempty_actions(&mut self, p: u32) -> Result<()> {
        if self.strategy0_actions.actions(p)?.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "empty strategy-0 action set in category {p}"
            )));
        }
        Ok(())
    }

    fn strategy0_action(&mut self, p: u32, arm: usize) -> Result<ActionId> {
        self.strategy0_actions
            .actions(p)?
            .get(arm)
            .copied()
            .ok_or_else(|| Error::OutOfDomain(format!("strategy-0 arm {arm} in category {p}")))
    }

    fn check_idle(&self) -> Result<()> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "a universal-rule round is still awaiting its reward".into(),
            ));
        }
        Ok(())
    }

    /// Purpose of round t. Reuses the memo of the first occurrence of the
    /// context in (p, q); otherwise draws U ~ Uniform[0, 1] and returns
    /// explore-0 if U <= p_t, explore-1 if p_t < U <= 2 p_t, exploit otherwise.
    pub fn assign_purpose(&mut self, t: u64, context: &ContextPoint, p: u32, q: u64) -> Purpose {
        let key = (p, q, context.id);
        if let Some(memo) = self.purposes.get(&key) {
            return memo.purpose;
        }
        let pt = exploration_probability(t);
        let u = self.purpose_rng.uniform();
        let purpose = if u <= pt {
            Purpose::Explore0
        } else if u <= 2.0 * pt {
            Purpose::Explore1
        } else {
            Purpose::Exploit
        };
        self.purposes.insert(
            key,
            PurposeMemo {
                purpose,
                first_round: t,
                exploration_probability: pt,
            },
        );
        purpose
    }

    fn memo(&self, p: u32, q: u64, context: &ContextPoint) -> Result<PurposeMemo> {
        self.purposes.get(&(p, q, context.id)).copied().ok_or_else(|| {
            Error::Protocol(format!(
                "context {} has no purpose in category {p}, period {q}",
                context.id
            ))
        })
    }

    /// Explore-0 round: plays the (p, q, context) EXP3. Its reward will add
    /// r_t / p_{t'} to R_p^0(q), t' being the first occurrence.
    pub fn explore0(&mut self, _t: u64, context: &ContextPoint, p: u32, q: u64) -> Result<ActionId> {
        self.check_idle()?;
        let memo = self.memo(p, q, context)?;
        self.ensure_nonempty_actions(p)?;
        let key = (p, q, context.id);
        let (arm, _) = self.strategy0_learner(key)?.select()?;
        self.pending = Some(Pending::Explore0 {
            key,
            arm,
            weight: 1.0 / memo.exploration_probability,
        });
        self.strategy0_action(p, arm)
    }

    /// Explore-1 round: draws l_t ~ U{1..k} with k = floor(log2 t) and plays
    /// pi^{l_t}(X_t). Its reward will add (k / p_{t'}) r_t to R_p^{l_t}(q).
    pub fn explore1(&mut self, t: u64, context: &ContextPoint, p: u32, q: u64) -> Result<ActionId> {
        let k = explore1_policy_count(t)?;
        self.explore1_with(k, context, p, q)
    }

    fn explore1_with(&mut self, k: u64, context: &ContextPoint, p: u32, q: u64) -> Result<ActionId> {
        self.check_idle()?;
        let memo = self.memo(p, q, context)?;
        let policy = self.explore1_rng.uniform_int(1, k);
        let action = self.policies.evaluate(policy, context)?;
        self.pending = Some(Pending::Explore1 {
            key: (p, q),
            policy,
            weight: k as f64 / memo.exploration_probability,
        });
        Ok(action)
    }

    /// Exploitation round: follows the plan P_p(q).
    pub fn exploit(&mut self, context: &ContextPoint, p: u32, q: u64) -> Result<(ActionId, Strategy)> {
        self.check_idle()?;
        let strategy = self.plan(p, q).ok_or_else(|| {
            Error::Protocol(format!("no strategy planned for category {p}, period {q}"))
        })?;
        match strategy {
            Strategy::Zero => {
                self.ensure_nonempty_actions(p)?;
                let key = (p, q, context.id);
                let (arm, _) = self.strategy0_learner(key)?.select()?;
                self.pending = Some(Pending::Exploit0 { key, arm });
                Ok((self.strategy0_action(p, arm)?, strategy))
            }
            Strategy::One => {
                let k = floor_log2(period_start(p, q)?).max(1);
                let seed = self.seed;
                let learner = match self.strat1.entry((p, q)) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(e) => {
                        let rng = SeededRng::substream(seed, &[tag::STRAT1, u64::from(p), q]);
                        e.insert(Exp3Ix::new(k as usize, rng)?)
                    }
                };
                let (arm, _) = learner.select()?;
                self.pending = Some(Pending::Exploit1 { key: (p, q), arm });
                let action = self.policies.evaluate(arm as u64 + 1, context)?;
                Ok((action, strategy))
            }
        }
    }

    /// Chooses the plan after period q of category p. With
    /// k = floor(log2 T_p^q), strategy 0 wins when
    /// R_p^0(q) - eta_p (T_p^{q+1} - T_p^q) >= max_{l <= k} R_p^l(q) and is then
    /// planned for periods q+1 ..= q + max(1, p 2^p); otherwise P_p(q+1) = 1.
    /// Existing plan entries are never overwritten.
    pub fn select_strategy(&mut self, p: u32, q: u64) -> Result<Option<Strategy>> {
        let start = period_start(p, q)?;
        let length = (period_start(p, q + 1)? - start) as f64;
        let k = floor_log2(start).max(1);
        let actions = self.strategy0_actions.actions(p)?.len();
        let penalty_rate = strategy0_penalty(actions, p);
        let estimators = self.estimators.get(&(p, q)).cloned().unwrap_or_default();
        let chosen = if self.plan(p, q + 1).is_some() {
            None
        } else {
            let best_policy = (1..=k)
                .map(|l| estimators.policy(l))
                .fold(f64::NEG_INFINITY, f64::max);
            if estimators.strategy0 - penalty_rate * length >= best_policy {
                for later in q + 1..=q + strategy0_plan_span(p)? {
                    self.plan.entry((p, later)).or_insert(Strategy::Zero);
                }
                Some(Strategy::Zero)
            } else {
                self.plan.insert((p, q + 1), Strategy::One);
                Some(Strategy::One)
            }
        };
        self.decisions.push(StrategyDecision {
            category: p,
            period: q,
            estimators,
            penalty_rate,
            period_length: length,
            policy_count: k,
            chosen,
        });
        Ok(chosen)
    }

    /// Drops all state of a finished period.
    fn retire_period(&mut self, p: u32, q: u64) {
        self.purposes.retain(|k, _| (k.0, k.1) != (p, q));
        self.strat0.retain(|k, _| (k.0, k.1) != (p, q));
        self.strat1.remove(&(p, q));
        self.estimators.remove(&(p, q));
        self.plan.retain(|k, _| k.0 != p || k.1 > q);
    }

    /// Runs SelectStrategy for every (p', q') whose period ends at round t.
    fn end_of_round(&mut self, t: u64) -> Result<()> {
        let Some(next) = t.checked_add(1) else {
            return Ok(());
        };
        let mut p = 0u32;
        while !in_initial_regime(p, next) {
            let q_next = period_of(p, next)?;
            if period_start(p, q_next)? == u128::from(next) && q_next > seeded_plan_period(p)? {
                let q = q_next - 1;
                self.select_strategy(p, q)?;
                self.retire_period(p, q);
            }
            p += 1;
        }
        Ok(())
    }
}

impl Learner for UniversalRule {
    fn name(&self) -> &'static str {
        self.name
    }

    fn select(&mut self, t: u64, context: &ContextPoint) -> Result<ActionId> {
        self.check_idle()?;
        self.clock.begin(t)?;
        let count = {
            let c = self.occurrences.entry(context.id).or_insert(0);
            *c += 1;
            *c
        };
        let p = category(count)?;
        let q = period_of(p, t)?;
        self.info = RoundInfo {
            category: Some(p),
            period: Some(q),
            purpose: None,
            regime: Regime::Initial,
            strategy: None,
        };
        if in_initial_regime(p, t) {
            self.ensure_nonempty_actions(p)?;
            let key = (p, context.id);
            let arms = self.strategy0_actions.actions(p)?.len();
            let seed = self.seed;
            let learner = match self.initial.entry(key) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let rng = SeededRng::substream(seed, &[tag::INITIAL, u64::from(p), context.id]);
                    e.insert(Exp3::new(arms, rng)?)
                }
            };
            let (arm, _) = learner.select()?;
            self.pending = Some(Pending::Initial { key, arm });
            self.info.strategy = Some(0);
            return self.strategy0_action(p, arm);
        }
        let purpose = self.assign_purpose(t, context, p, q);
        self.info.purpose = Some(purpose);
        match purpose {
            Purpose::Explore0 => {
                self.info.regime = Regime::Explore0;
                self.explore0(t, context, p, q)
            }
            Purpose::Explore1 => {
                self.info.regime = Regime::Explore1;
                // t = 1 leaves U{1..0} empty; fall back to pi^1 alone
                let k = match explore1_policy_count(t) {
                    Ok(k) => k,
                    Err(Error::NoPolicies(_)) => 1,
                    Err(e) => return Err(e),
                };
                self.explore1_with(k, context, p, q)
            }
            Purpose::Exploit => {
                let (action, strategy) = self.exploit(context, p, q)?;
                self.info.strategy = Some(strategy.code());
                self.info.regime = match strategy {
                    Strategy::Zero => Regime::ExploitStrategy0,
                    Strategy::One => Regime::ExploitStrategy1,
                };
                Ok(action)
            }
        }
    }

    fn feed(&mut self, reward: RewardSample) -> Result<()> {
        let r = reward.unit_value()?;
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("feed without a pending select".into()))?;
        let t = self.clock.end()?;
        match pending {
            Pending::Initial { key, arm } => {
                if let Some(l) = self.initial.get_mut(&key) {
                    l.update(arm, r)?;
                }
            }
            Pending::Explore0 { key, arm, weight } => {
                if let Some(l) = self.strat0.get_mut(&key) {
                    l.update(arm, r)?;
                }
                self.estimators.entry((key.0, key.1)).or_default().strategy0 += weight * r;
            }
            Pending::Explore1 { key, policy, weight } => {
                self.estimators
                    .entry(key)
                    .or_default()
                    .add_policy(policy, weight * r);
            }
            Pending::Exploit0 { key, arm } => {
                if let Some(l) = self.strat0.get_mut(&key) {
                    l.update(arm, r)?;
                }
            }
            Pending::Exploit1 { key, arm } => {
                if let Some(l) = self.strat1.get_mut(&key) {
                    l.update(arm, r)?;
                }
            }
        }
        self.end_of_round(t)
    }

    fn round_info(&self) -> RoundInfo {
        self.info
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Partition;

    fn rule(actions: usize, seed: u64) -> UniversalRule {
        UniversalRule::new(actions, ContextDomain::new(Partition::Identity), seed).unwrap()
    }

    fn memoize(rule: &mut UniversalRule, p: u32, q: u64, ctx: u64, purpose: Purpose, t: u64) {
        rule.purposes.insert(
            (p, q, ctx),
            PurposeMemo {
                purpose,
                first_round: t,
                exploration_probability: exploration_probability(t),
            },
        );
    }

    #[test]
    fn purpose_probabilities_at_t256() {
        let mut counts = [0usize; 3];
        let mut r = rule(2, 5);
        let n = 200_000u64;
        for id in 0..n {
            let purpose = r.assign_purpose(256, &ContextPoint::new(id), 0, 8);
            counts[purpose.code() as usize] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|c| *c as f64 / n as f64).collect();
        assert!((freq[0] - 0.125).abs() < 0.004, "{freq:?}");
        assert!((freq[1] - 0.125).abs() < 0.004, "{freq:?}");
        assert!((freq[2] - 0.75).abs() < 0.005, "{freq:?}");
    }

    #[test]
    fn no_exploitation_at_first_round() {
        let mut r = rule(2, 1);
        for id in 0..10_000 {
            let purpose = r.assign_purpose(1, &ContextPoint::new(id), 0, 0);
            assert_ne!(purpose, Purpose::Exploit);
        }
    }

    #[test]
    fn purpose_is_memoized() {
        let mut r = rule(2, 1);
        let x = ContextPoint::new(3);
        let first = r.assign_purpose(16, &x, 0, 4);
        for t in 17..32 {
            assert_eq!(r.assign_purpose(t, &x, 0, 4), first);
        }
        assert_eq!(r.purpose_memo(0, 4, &x).unwrap().first_round, 16);
    }

    #[test]
    fn explore0_needs_memo() {
        let mut r = rule(2, 1);
        assert!(r.explore0(16, &ContextPoint::new(1), 0, 4).is_err());
    }

    #[test]
    fn explore0_estimator_update() {
        let mut r = rule(2, 1);
        r.clock.begin(1).unwrap();
        let x = ContextPoint::new(1);
        memoize(&mut r, 0, 4, 1, Purpose::Explore0, 256);
        let probs = {
            r.explore0(16, &x, 0, 4).unwrap();
            r.strat0[&(0, 4, 1)].last_probs().to_vec()
        };
        assert_eq!(probs, vec![0.5, 0.5]);
        r.feed(RewardSample::bounded(0.5).unwrap()).unwrap();
        assert!((r.estimators(0, 4).unwrap().strategy0 - 4.0).abs() < 1e-12);

        r.clock.begin(2).unwrap();
        r.explore0(17, &x, 0, 4).unwrap();
        r.feed(RewardSample::bounded(0.0).unwrap()).unwrap();
        assert!((r.estimators(0, 4).unwrap().strategy0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn explore1_estimator_update() {
        let x = ContextPoint::new(1);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..60 {
            let mut r = rule(3, seed);
            r.clock.begin(1).unwrap();
            // first occurrence at t' = 256, so p_{t'} = 1/8; round t = 8 gives k = 3
            memoize(&mut r, 0, 3, 1, Purpose::Explore1, 256);
            r.explore1(8, &x, 0, 3).unwrap();
            let Some(Pending::Explore1 { policy, .. }) = r.pending else {
                panic!("explore1 did not leave a pending round");
            };
            assert!((1..=3).contains(&policy));
            seen.insert(policy);
            r.feed(RewardSample::bounded(1.0).unwrap()).unwrap();
            let est = r.estimators(0, 3).unwrap();
            for l in 1..=3 {
                let want = if l == policy { 24.0 } else { 0.0 };
                assert!((est.policy(l) - want).abs() < 1e-12);
            }
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn explore1_zero_reward_leaves_estimators() {
        let mut r = rule(3, 0);
        r.clock.begin(1).unwrap();
        let x = ContextPoint::new(1);
        memoize(&mut r, 0, 3, 1, Purpose::Explore1, 8);
        r.explore1(8, &x, 0, 3).unwrap();
        r.feed(RewardSample::bounded(0.0).unwrap()).unwrap();
        let est = r.estimators(0, 3).unwrap();
        assert!(est.policies.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn explore1_without_policies_errors() {
        let mut r = rule(3, 0);
        let x = ContextPoint::new(1);
        memoize(&mut r, 0, 0, 1, Purpose::Explore1, 1);
        assert!(matches!(r.explore1(1, &x, 0, 0), Err(Error::NoPolicies(1))));
    }

    #[test]
    fn select_strategy_prefers_policies_over_unexplored_strategy0() {
        let mut r = rule(2, 0);
        r.estimators.insert(
            (0, 5),
            Estimators {
                strategy0: 0.0,
                policies: vec![0.5],
            },
        );
        assert_eq!(r.select_strategy(0, 5).unwrap(), Some(Strategy::One));
        assert_eq!(r.plan(0, 6), Some(Strategy::One));
        // second call is a no-op
        assert_eq!(r.select_strategy(0, 5).unwrap(), None);
    }

    #[test]
    fn strategy0_win_plans_ahead() {
        let mut r = rule(2, 0);
        let q = 5;
        // p = 2 at its first selectable period: plan covers q+1..=q+8
        let q2 = seeded_plan_period(2).unwrap();
        r.estimators.insert(
            (2, q2),
            Estimators {
                strategy0: 1e30,
                policies: vec![1.0; 64],
            },
        );
        assert_eq!(r.select_strategy(2, q2).unwrap(), Some(Strategy::Zero));
        for later in q2 + 1..=q2 + 8 {
            assert_eq!(r.plan(2, later), Some(Strategy::Zero));
        }
        assert_eq!(r.plan(2, q2 + 9), None);

        // p = 0 still plans one period
        r.estimators.insert(
            (0, q),
            Estimators {
                strategy0: 1e6,
                policies: vec![],
            },
        );
        assert_eq!(r.select_strategy(0, q).unwrap(), Some(Strategy::Zero));
        assert_eq!(r.plan(0, q + 1), Some(Strategy::Zero));
        assert_eq!(r.plan(0, q + 2), None);
    }

    #[test]
    fn plan_entries_are_not_overwritten() {
        let mut r = rule(2, 0);
        r.plan.insert((0, 4), Strategy::One);
        r.estimators.insert(
            (0, 3),
            Estimators {
                strategy0: 1e6,
                policies: vec![],
            },
        );
        assert_eq!(r.select_strategy(0, 3).unwrap(), None);
        assert_eq!(r.plan(0, 4), Some(Strategy::One));
    }

    #[test]
    fn first_round_is_on_the_purpose_path() {
        let mut r = rule(2, 9);
        r.select(1, &ContextPoint::new(0)).unwrap();
        let info = r.round_info();
        assert_eq!(info.category, Some(0));
        assert_eq!(info.period, Some(0));
        assert!(matches!(info.regime, Regime::Explore0 | Regime::Explore1));
        r.feed(RewardSample::bounded(1.0).unwrap()).unwrap();
        // the end of period (0, 0) fixed P_0(1)
        assert!(r.plan(0, 1).is_some());
    }

    #[test]
    fn frequent_context_uses_initial_regime() {
        let mut r = rule(3, 2);
        let x = ContextPoint::new(42);
        for t in 1..=6 {
            r.select(t, &x).unwrap();
            r.feed(RewardSample::bounded(0.3).unwrap()).unwrap();
        }
        assert_eq!(r.round_info().category, Some(1));
        assert_eq!(r.round_info().regime, Regime::Initial);
    }

    #[test]
    fn strategy1_exploit_starts_uniform() {
        let mut r = rule(2, 3);
        r.plan.insert((0, 4), Strategy::One);
        r.clock.begin(1).unwrap();
        let (_, s) = r.exploit(&ContextPoint::new(1), 0, 4).unwrap();
        assert_eq!(s, Strategy::One);
        assert_eq!(r.strat1[&(0, 4)].last_probs(), &[0.25; 4]);
    }

    #[test]
    fn out_of_order_rounds_error() {
        let mut r = rule(2, 0);
        assert!(r.select(2, &ContextPoint::new(0)).is_err());
    }

    #[test]
    fn finished_periods_are_dropped() {
        let mut r = rule(2, 4);
        for t in 1..=(1 << 12) {
            r.select(t, &ContextPoint::new(t)).unwrap();
            r.feed(RewardSample::bounded(0.5).unwrap()).unwrap();
        }
        // only the running period (0, 12) can hold per-instance learners
        assert!(r.strat0.keys().all(|k| k.1 == 12));
        assert!(r.purposes.keys().all(|k| k.1 == 12));
        assert_eq!(r.decisions().len(), 12);
    }
}

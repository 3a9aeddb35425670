use crate::domain::ActionId;
use crate::error::{Error, Result};
use crate::rng::{tag, SeededRng};

use super::Exp3Ix;

/// S_i = sum_{j <= i} j^3 = (i (i + 1) / 2)^2.
pub fn cumulative_cubes(i: u64) -> u128 {
    let tri = (i as u128) * (i as u128 + 1) / 2;
    tri * tri
}

/// Period index i of round t: the unique i with S_{i-1} < t <= S_i.
/// Period i therefore spans exactly i^3 rounds and uses experts 1..=i.
pub fn expinf_period_of(t: u64) -> Result<u64> {
    if t < 1 {
        return Err(Error::InvalidArgument("EXPINF rounds start at 1".into()));
    }
    // S_i ~ i^4 / 4, so i ~ (4t)^{1/4}; correct the float guess exactly.
    let mut i = ((4.0 * t as f64).powf(0.25)).floor().max(1.0) as u64;
    while i > 1 && cumulative_cubes(i - 1) >= t as u128 {
        i -= 1;
    }
    while cumulative_cubes(i) < t as u128 {
        i += 1;
    }
    Ok(i)
}

/// EXPINF: an EXP3.IX over experts 1..=i, restarted at the start of every
/// period i. With a finite expert pool of size n the inner learner uses
/// min(i, n) arms.
#[derive(Debug, Clone)]
pub struct ExpInf {
    seed: u64,
    expert_cap: Option<usize>,
    rounds: u64,
    period: u64,
    period_start: u64,
    period_end: u64,
    inner: Option<Exp3Ix>,
    pending: Option<usize>,
}

impl ExpInf {
    /// `expert_cap` bounds the pool for finite expert families.
    pub fn new(expert_cap: Option<usize>, seed: u64) -> Result<Self> {
        if expert_cap == Some(0) {
            return Err(Error::InvalidArgument("EXPINF needs at least one expert".into()));
        }
        Ok(ExpInf {
            seed,
            expert_cap,
            rounds: 0,
            period: 0,
            period_start: 0,
            period_end: 0,
            inner: None,
            pending: None,
        })
    }

    fn arms_for_period(&self, period: u64) -> usize {
        let i = period as usize;
        self.expert_cap.map_or(i, |cap| i.min(cap))
    }

    /// Number of expert proposals the next `select` expects.
    pub fn experts_needed(&self) -> usize {
        let t = self.rounds + 1;
        if t <= self.period_end {
            self.arms_for_period(self.period)
        } else {
            // t >= 1, so the period lookup cannot fail
            self.arms_for_period(expinf_period_of(t).unwrap_or(1))
        }
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Current period index (0 before the first round).
    pub fn current_period(&self) -> u64 {
        self.period
    }

    /// First and last round of the current period.
    pub fn period_bounds(&self) -> (u64, u64) {
        (self.period_start, self.period_end)
    }

    pub fn inner(&self) -> Option<&Exp3Ix> {
        self.inner.as_ref()
    }

    pub fn inner_arms(&self) -> usize {
        self.inner.as_ref().map_or(0, Exp3Ix::arms)
    }

    fn roll_period(&mut self, t: u64) -> Result<()> {
        let period = expinf_period_of(t)?;
        let end = cumulative_cubes(period);
        self.period = period;
        self.period_start = (cumulative_cubes(period - 1) + 1) as u64;
        self.period_end = u64::try_from(end).unwrap_or(u64::MAX);
        let rng = SeededRng::substream(self.seed, &[tag::EXPINF, period]);
        self.inner = Some(Exp3Ix::new(self.arms_for_period(period), rng)?);
        Ok(())
    }

    /// Picks one of the proposed expert actions. Returns the 0-based expert
    /// index and its action.
    pub fn select(&mut self, expert_actions: &[ActionId]) -> Result<(usize, ActionId)> {
        if self.pending.is_some() {
            return Err(Error::Protocol("EXPINF select while an update is pending".into()));
        }
        let t = self.rounds + 1;
        if t > self.period_end {
            self.roll_period(t)?;
        }
        let inner = self
            .inner
            .as_mut()
            .ok_or_else(|| Error::Protocol("EXPINF has no inner learner".into()))?;
        if expert_actions.len() != inner.arms() {
            return Err(Error::InvalidArgument(format!(
                "EXPINF period {} expects {} expert actions, got {}",
                self.period,
                inner.arms(),
                expert_actions.len()
            )));
        }
        let (arm, _) = inner.select()?;
        self.pending = Some(arm);
        Ok((arm, expert_actions[arm]))
    }

    pub fn update(&mut self, reward: f64) -> Result<()> {
        let arm = self
            .pending
            .ok_or_else(|| Error::Protocol("EXPINF update without pending select".into()))?;
        let inner = self
            .inner
            .as_mut()
            .ok_or_else(|| Error::Protocol("EXPINF has no inner learner".into()))?;
        inner.update(arm, reward)?;
        self.pending = None;
        self.rounds += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_period(t: u64) -> u64 {
        let mut acc = 0u64;
        let mut i = 0u64;
        while acc < t {
            i += 1;
            acc += i * i * i;
        }
        i
    }

    #[test]
    fn period_examples() {
        assert_eq!(expinf_period_of(1).unwrap(), 1);
        assert_eq!(expinf_period_of(9).unwrap(), 2);
        assert_eq!(expinf_period_of(10).unwrap(), 3);
        assert_eq!(expinf_period_of(36).unwrap(), 3);
        assert_eq!(expinf_period_of(37).unwrap(), 4);
        assert!(expinf_period_of(0).is_err());
    }

    #[test]
    fn period_matches_brute_force() {
        for t in 1..20_000 {
            assert_eq!(expinf_period_of(t).unwrap(), brute_period(t), "t = {t}");
        }
    }

    #[test]
    fn period_one_plays_first_expert() {
        let mut e = ExpInf::new(None, 11).unwrap();
        assert_eq!(e.experts_needed(), 1);
        let (i, a) = e.select(&[ActionId(7)]).unwrap();
        assert_eq!((i, a), (0, ActionId(7)));
        e.update(0.3).unwrap();
        assert_eq!(e.experts_needed(), 2);
    }

    #[test]
    fn boundary_resets_inner_learner() {
        let mut e = ExpInf::new(None, 2).unwrap();
        for t in 1..=9u64 {
            let n = e.experts_needed();
            let experts: Vec<ActionId> = (0..n).map(ActionId).collect();
            let (i, _) = e.select(&experts).unwrap();
            e.update(if i == 0 { 1.0 } else { 0.0 }).unwrap();
            if t >= 2 {
                assert_eq!(e.inner_arms(), 2);
            }
        }
        // after 8 rounds in period 2 the inner distribution is not uniform
        assert_ne!(e.inner().unwrap().probabilities(), vec![0.5, 0.5]);
        assert_eq!(e.experts_needed(), 3);
        let experts: Vec<ActionId> = (0..3).map(ActionId).collect();
        e.select(&experts).unwrap();
        assert_eq!(e.current_period(), 3);
        assert_eq!(e.inner_arms(), 3);
        assert_eq!(e.inner().unwrap().last_probs(), &[1.0 / 3.0; 3]);
        assert_eq!(e.period_bounds(), (10, 36));
    }

    #[test]
    fn wrong_expert_count_is_an_error() {
        let mut e = ExpInf::new(None, 2).unwrap();
        assert!(e.select(&[ActionId(0), ActionId(1)]).is_err());
    }

    #[test]
    fn expert_cap_limits_arms() {
        let mut e = ExpInf::new(Some(2), 4).unwrap();
        for _ in 0..40 {
            let n = e.experts_needed();
            assert!(n <= 2);
            let experts: Vec<ActionId> = (0..n).map(ActionId).collect();
            e.select(&experts).unwrap();
            e.update(0.5).unwrap();
        }
        assert_eq!(e.current_period(), 4);
        assert_eq!(e.inner_arms(), 2);
    }
}

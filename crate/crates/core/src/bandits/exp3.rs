use crate::error::{Error, Result};
use crate::rng::SeededRng;

use super::softmax_into;

/// EXP3 with the anytime rate eta_t = sqrt(ln K / (t K)).
///
/// Arm probabilities are proportional to exp(eta_t * G_i), where G_i sums the
/// reward estimates 1 - (1 - r) 1[i played] / p_i. The estimate is unbiased and
/// only ever lowers the played arm relative to the others, so the exponent
/// stays bounded above. Weights are kept in the log domain and max-normalized
/// before exponentiation.
#[derive(Debug, Clone)]
pub struct Exp3 {
    arms: usize,
    rounds: u64,
    gains: Vec<f64>,
    last_probs: Vec<f64>,
    pending: Option<usize>,
    rng: SeededRng,
}

impl Exp3 {
    pub fn new(arms: usize, rng: SeededRng) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidArgument("EXP3 needs at least one arm".into()));
        }
        Ok(Exp3 {
            arms,
            rounds: 0,
            gains: vec![0.0; arms],
            last_probs: vec![1.0 / arms as f64; arms],
            pending: None,
            rng,
        })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Learning rate for the t-th round played by this learner.
    pub fn rate(arms: usize, t: u64) -> f64 {
        if arms < 2 || t == 0 {
            return 0.0;
        }
        let k = arms as f64;
        (k.ln() / (t as f64 * k)).sqrt()
    }

    /// Distribution the next `select` will sample from.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.arms];
        let eta = Self::rate(self.arms, self.rounds + 1);
        softmax_into(self.gains.iter().map(|g| eta * g), &mut probs);
        probs
    }

    pub fn last_probs(&self) -> &[f64] {
        &self.last_probs
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn select(&mut self) -> Result<(usize, &[f64])> {
        if self.pending.is_some() {
            return Err(Error::Protocol("EXP3 select while an update is pending".into()));
        }
        let eta = Self::rate(self.arms, self.rounds + 1);
        softmax_into(self.gains.iter().map(|g| eta * g), &mut self.last_probs);
        let arm = self.rng.categorical(&self.last_probs);
        self.pending = Some(arm);
        Ok((arm, &self.last_probs))
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange {
                value: reward,
                range: "[0, 1]",
            });
        }
        match self.pending {
            Some(a) if a == arm => {}
            Some(a) => {
                return Err(Error::Protocol(format!(
                    "EXP3 update for arm {arm} but arm {a} was selected"
                )))
            }
            None => return Err(Error::Protocol("EXP3 update without pending select".into())),
        }
        for g in &mut self.gains {
            *g += 1.0;
        }
        self.gains[arm] -= (1.0 - reward) / self.last_probs[arm];
        self.rounds += 1;
        self.pending = None;
        Ok(())
    }
}

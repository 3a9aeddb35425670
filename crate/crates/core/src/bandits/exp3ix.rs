use crate::error::{Error, Result};
use crate::rng::SeededRng;

use super::softmax_into;

/// EXP3.IX: exponential weights on implicit-exploration loss estimates
/// l_hat = (1 - r) / (p + gamma_t), with the horizon-free parameters
/// eta_t = sqrt(2 ln K / (K t)) and gamma_t = eta_t / 2.
#[derive(Debug, Clone)]
pub struct Exp3Ix {
    arms: usize,
    rounds: u64,
    losses: Vec<f64>,
    last_probs: Vec<f64>,
    eta: f64,
    gamma: f64,
    pending: Option<usize>,
    rng: SeededRng,
}

impl Exp3Ix {
    pub fn new(arms: usize, rng: SeededRng) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidArgument("EXP3.IX needs at least one arm".into()));
        }
        Ok(Exp3Ix {
            arms,
            rounds: 0,
            losses: vec![0.0; arms],
            last_probs: vec![1.0 / arms as f64; arms],
            eta: 0.0,
            gamma: 0.0,
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

    pub fn rate(arms: usize, t: u64) -> f64 {
        if arms < 2 || t == 0 {
            return 0.0;
        }
        let k = arms as f64;
        (2.0 * k.ln() / (k * t as f64)).sqrt()
    }

    pub fn implicit_exploration(arms: usize, t: u64) -> f64 {
        Self::rate(arms, t) / 2.0
    }

    /// (eta_t, gamma_t) of the last selected round.
    pub fn parameters(&self) -> (f64, f64) {
        (self.eta, self.gamma)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut probs = vec![0.0; self.arms];
        let eta = Self::rate(self.arms, self.rounds + 1);
        softmax_into(self.losses.iter().map(|l| -eta * l), &mut probs);
        probs
    }

    pub fn last_probs(&self) -> &[f64] {
        &self.last_probs
    }

    pub fn select(&mut self) -> Result<(usize, &[f64])> {
        if self.pending.is_some() {
            return Err(Error::Protocol(
                "EXP3.IX select while an update is pending".into(),
            ));
        }
        let t = self.rounds + 1;
        self.eta = Self::rate(self.arms, t);
        self.gamma = Self::implicit_exploration(self.arms, t);
        let eta = self.eta;
        softmax_into(self.losses.iter().map(|l| -eta * l), &mut self.last_probs);
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
                    "EXP3.IX update for arm {arm} but arm {a} was selected"
                )))
            }
            None => {
                return Err(Error::Protocol(
                    "EXP3.IX update without pending select".into(),
                ))
            }
        }
        let loss = 1.0 - reward;
        self.losses[arm] += loss / (self.last_probs[arm] + self.gamma);
        self.rounds += 1;
        self.pending = None;
        Ok(())
    }
}

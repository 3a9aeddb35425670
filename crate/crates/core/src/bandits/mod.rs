//! Adversarial multi-armed bandit primitives.

mod exp3;
mod exp3ix;
mod expinf;

pub use exp3::Exp3;
pub use exp3ix::Exp3Ix;
pub use expinf::{cumulative_cubes, expinf_period_of, ExpInf};

/// Writes softmax(logits) into `out`, subtracting the max logit first.
pub(crate) fn softmax_into(logits: impl Iterator<Item = f64> + Clone, out: &mut [f64]) {
    let max = logits.clone().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn select_returns_a_distribution(
            arms in 1usize..12,
            rewards in prop::collection::vec(0.0f64..=1.0, 1..200),
            seed in any::<u64>(),
        ) {
            let mut a = Exp3::new(arms, SeededRng::new(seed)).unwrap();
            let mut b = Exp3Ix::new(arms, SeededRng::new(seed)).unwrap();
            for r in rewards {
                let (arm, probs) = a.select().unwrap();
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(probs.iter().all(|p| *p >= 0.0));
                a.update(arm, r).unwrap();
                let (arm, probs) = b.select().unwrap();
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(probs.iter().all(|p| *p >= 0.0));
                b.update(arm, r).unwrap();
            }
        }

        #[test]
        fn replay_is_deterministic(seed in any::<u64>(), arms in 2usize..6) {
            let run = || {
                let mut e = Exp3::new(arms, SeededRng::new(seed)).unwrap();
                (0..100).map(|i| {
                    let (arm, _) = e.select().unwrap();
                    e.update(arm, ((i * 7 + arm) % 3) as f64 / 2.0).unwrap();
                    arm
                }).collect::<Vec<_>>()
            };
            prop_assert_eq!(run(), run());
        }
    }

    #[test]
    fn expinf_period_lengths_are_cubes() {
        for i in 1..200u64 {
            assert_eq!(
                cumulative_cubes(i) - cumulative_cubes(i - 1),
                (i as u128).pow(3)
            );
        }
    }
}

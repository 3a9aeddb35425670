//! Category, period and parameter schedule of the universal rule. All
//! quantities are exact integer functions of (p, q, t).

use crate::error::{Error, Result};

/// floor(log_4 count), for the number of occurrences of X_t up to and
/// including round t.
pub fn category(occurrences: u64) -> Result<u32> {
    if occurrences < 1 {
        return Err(Error::InvalidArgument(
            "category needs at least one occurrence".into(),
        ));
    }
    let mut p = 0u32;
    let mut next: u128 = 4;
    while next <= occurrences as u128 {
        p += 1;
        next *= 4;
    }
    Ok(p)
}

/// Smallest valid period index for category p: p * 2^p.
pub fn first_period(p: u32) -> Result<u64> {
    1u64.checked_shl(p)
        .filter(|_| p < 63)
        .and_then(|two_p| u64::from(p).checked_mul(two_p))
        .ok_or_else(|| Error::Overflow(format!("period index range of category {p}")))
}

/// Period whose plan is fixed to strategy 0 at initialization: p * 2^{p+5}.
pub fn seeded_plan_period(p: u32) -> Result<u64> {
    first_period(p)?
        .checked_mul(32)
        .ok_or_else(|| Error::Overflow(format!("seeded plan period of category {p}")))
}

/// T_p^q = 2^k + (i / 2^p) 2^k with q = k 2^p + i, 0 <= i < 2^p.
///
/// Returned as u128 so period starts past the 64-bit round range stay exact.
pub fn period_start(p: u32, q: u64) -> Result<u128> {
    let min_q = first_period(p)?;
    if q < min_q {
        return Err(Error::InvalidArgument(format!(
            "period {q} below the valid range q >= {min_q} of category {p}"
        )));
    }
    let k = q >> p;
    let i = u128::from(q & ((1u64 << p) - 1));
    if k >= 127 {
        return Err(Error::Overflow(format!("T_{p}^{q} exceeds 128 bits")));
    }
    // k >= p because q >= p 2^p, so 2^{k-p} is an integer
    let base = 1u128 << k;
    let step = 1u128 << (k - u64::from(p));
    Ok(base + i * step)
}

/// The unique q with T_p^q <= t < T_p^{q+1}.
pub fn period_of(p: u32, t: u64) -> Result<u64> {
    let first = period_start(p, first_period(p)?)?;
    if u128::from(t) < first {
        return Err(Error::InvalidArgument(format!(
            "round {t} precedes the first period of category {p} (starts at {first})"
        )));
    }
    let k = u64::from(63 - t.leading_zeros());
    let step = 1u64 << (k - u64::from(p));
    let i = (t - (1u64 << k)) / step;
    Ok((k << p) + i)
}

/// p_t = 1 / (2 t^{1/4}).
pub fn exploration_probability(t: u64) -> f64 {
    1.0 / (2.0 * (t as f64).powf(0.25))
}

/// True while t < 2^{32p}, where category p runs per-instance EXP3 without
/// period restriction.
pub fn in_initial_regime(p: u32, t: u64) -> bool {
    match 32u32.checked_mul(p) {
        Some(e) if e < 64 => t < (1u64 << e),
        _ => true,
    }
}

/// Number of periods planned ahead when strategy 0 wins: max(1, p 2^p).
pub fn strategy0_plan_span(p: u32) -> Result<u64> {
    Ok(first_period(p)?.max(1))
}

/// eta_p = 10 sqrt(K ln K) / 2^{p/4} for K strategy-0 actions.
pub fn strategy0_penalty(actions: usize, p: u32) -> f64 {
    let k = actions as f64;
    let spread = if actions > 1 { (k * k.ln()).sqrt() } else { 0.0 };
    10.0 * spread / 2f64.powf(f64::from(p) / 4.0)
}

/// floor(log2 x) for x >= 1.
pub fn floor_log2(x: impl Into<u128>) -> u64 {
    let x: u128 = x.into();
    debug_assert!(x >= 1);
    u64::from(127 - x.max(1).leading_zeros())
}

/// Policy count k = floor(log2 t) of an explore-1 round.
pub fn explore1_policy_count(t: u64) -> Result<u64> {
    let k = if t == 0 { 0 } else { floor_log2(t) };
    if k == 0 {
        return Err(Error::NoPolicies(t));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_examples() {
        assert_eq!(category(1).unwrap(), 0);
        assert_eq!(category(3).unwrap(), 0);
        assert_eq!(category(4).unwrap(), 1);
        assert_eq!(category(63).unwrap(), 2);
        assert_eq!(category(64).unwrap(), 3);
        assert_eq!(category(u64::MAX).unwrap(), 31);
        assert!(category(0).is_err());
    }

    #[test]
    fn period_start_examples() {
        assert_eq!(period_start(0, 5).unwrap(), 32);
        assert_eq!(period_start(2, 11).unwrap(), 7);
        assert_eq!(period_start(1, 3).unwrap(), 3);
        assert!(period_start(2, 7).is_err());
        assert_eq!(period_start(0, 64).unwrap(), 1u128 << 64);
        assert!(period_start(0, 127).is_err());
    }

    #[test]
    fn period_of_inverts_period_start() {
        for p in 0..=6u32 {
            let q0 = first_period(p).unwrap();
            for q in q0..(63u64 << p).min(q0 + 200) {
                let start = period_start(p, q).unwrap();
                let next = period_start(p, q + 1).unwrap();
                assert!(start < next);
                for t in [start, next - 1, (start + next) / 2] {
                    assert_eq!(period_of(p, t as u64).unwrap(), q, "p={p} t={t}");
                }
            }
        }
        assert!(period_of(2, 3).is_err());
    }

    #[test]
    fn exploration_probability_examples() {
        assert!((exploration_probability(16) - 0.25).abs() < 1e-15);
        assert!((exploration_probability(256) - 0.125).abs() < 1e-15);
        assert!((exploration_probability(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn initial_regime_threshold() {
        assert!(!in_initial_regime(0, 1));
        assert!(in_initial_regime(1, (1 << 32) - 1));
        assert!(!in_initial_regime(1, 1 << 32));
        assert!(in_initial_regime(2, u64::MAX));
        assert!(in_initial_regime(40, 5));
    }

    #[test]
    fn penalty_examples() {
        // 10 sqrt(2 ln 2)
        assert!((strategy0_penalty(2, 0) - 11.774_100).abs() < 1e-5);
        assert_eq!(strategy0_penalty(1, 3), 0.0);
        assert!((strategy0_penalty(3, 4) - 10.0 * (3.0 * 3f64.ln()).sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn plan_span_and_seed() {
        assert_eq!(strategy0_plan_span(0).unwrap(), 1);
        assert_eq!(strategy0_plan_span(2).unwrap(), 8);
        assert_eq!(seeded_plan_period(0).unwrap(), 0);
        assert_eq!(seeded_plan_period(1).unwrap(), 64);
        assert_eq!(seeded_plan_period(2).unwrap(), 256);
    }

    #[test]
    fn explore1_counts() {
        assert_eq!(explore1_policy_count(8).unwrap(), 3);
        assert_eq!(explore1_policy_count(2).unwrap(), 1);
        assert!(matches!(explore1_policy_count(1), Err(Error::NoPolicies(1))));
    }

    #[test]
    fn schedule_sandwich() {
        for p in 0..=6u32 {
            let mut q = first_period(p).unwrap();
            loop {
                let lo = period_start(p, q).unwrap();
                let hi = period_start(p, q + 1).unwrap();
                if hi > 1 << 20 {
                    break;
                }
                let len = hi - lo;
                assert!(hi <= len << (p + 1), "p={p} q={q}");
                assert!(len << p <= lo, "p={p} q={q}");
                q += 1;
            }
        }
    }
}

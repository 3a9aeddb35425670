use std::collections::HashMap;

use proptest::prelude::*;

use unibandit::policy_net::ContextDomain;
use unibandit::universal::{category, period_of, Strategy, UniversalRule};
use unibandit::{ContextPoint, Learner, Purpose, RewardSample};

fn drive(rule: &mut UniversalRule, ids: &[u64]) -> Vec<(u64, unibandit::RoundInfo)> {
    let mut out = Vec::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        let t = i as u64 + 1;
        let x = ContextPoint::new(*id);
        let a = rule.select(t, &x).unwrap();
        out.push((*id, rule.round_info()));
        let r = if (a.0 as u64 + id) % 2 == 0 { 1.0 } else { 0.0 };
        rule.feed(RewardSample::bounded(r).unwrap()).unwrap();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_tags_follow_counts_and_schedule(
        ids in prop::collection::vec(0u64..40, 1..600),
        seed in any::<u64>(),
    ) {
        let mut rule = UniversalRule::new(3, ContextDomain::default(), seed).unwrap();
        let infos = drive(&mut rule, &ids);
        let mut counts: HashMap<u64, u64> = HashMap::new();
        let mut purposes: HashMap<(u32, u64, u64), Purpose> = HashMap::new();
        for (i, (id, info)) in infos.iter().enumerate() {
            let t = i as u64 + 1;
            let c = counts.entry(*id).or_insert(0);
            *c += 1;
            let p = category(*c).unwrap();
            prop_assert_eq!(info.category, Some(p));
            if let (Some(q), Some(purpose)) = (info.period, info.purpose) {
                prop_assert_eq!(p, 0);
                prop_assert_eq!(q, period_of(0, t).unwrap());
                let first = *purposes.entry((p, q, *id)).or_insert(purpose);
                prop_assert_eq!(first, purpose);
            }
        }
    }

    #[test]
    fn replays_are_identical(ids in prop::collection::vec(0u64..10, 1..300), seed in any::<u64>()) {
        let run = || {
            let mut rule = UniversalRule::new(2, ContextDomain::default(), seed).unwrap();
            drive(&mut rule, &ids)
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn repeated_contexts_leave_the_purpose_path() {
    let ids: Vec<u64> = (0..400).map(|t| t % 3).collect();
    let mut rule = UniversalRule::new(2, ContextDomain::default(), 1).unwrap();
    let infos = drive(&mut rule, &ids);
    // three occurrences of each context stay in category 0
    assert_eq!(infos.iter().filter(|(_, i)| i.purpose.is_some()).count(), 9);
    assert!(infos[9..].iter().all(|(_, i)| i.purpose.is_none() && i.category >= Some(1)));
}

#[test]
fn closed_periods_pick_strategy_one_on_fresh_contexts() {
    let ids: Vec<u64> = (0..4096).collect();
    let mut rule = UniversalRule::new(2, ContextDomain::default(), 8).unwrap();
    drive(&mut rule, &ids);
    let closed: Vec<_> = rule.decisions().iter().filter(|d| d.category == 0).collect();
    assert!(!closed.is_empty());
    // the per-round penalty of strategy 0 exceeds any reward rate
    for d in closed {
        if let Some(s) = d.chosen {
            assert_eq!(s, Strategy::One, "period {}", d.period);
        }
    }
}

use std::collections::BTreeMap;

use serde::Serialize;

use crate::domain::{ActionId, ActionSpace};
use crate::error::{Error, Result};
use crate::metric::{greedy_net_points, Metric};
use crate::policy_net::ContextDomain;
use crate::universal::schedule::strategy0_penalty;
use crate::universal::{Strategy0Actions, UniversalRule};

/// Strategy-0 net of category p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetParams {
    pub p: u32,
    pub delta_p: f64,
    /// Candidate indices in the net, in index order.
    pub net: Vec<usize>,
    pub eta_p: f64,
    pub epsilon_p: f64,
}

fn net_cost(n: usize) -> f64 {
    let n = n as f64;
    n * n.ln()
}

/// Net parameters of category p: delta_p = min{2^{-i} : |A(2^{-i})| ln|A(2^{-i})| <= 2^{p/4}}.
///
/// The scan runs i = 0, 1, 2, ... and stops at the first radius over budget
/// or once the net holds every candidate. If the unit radius is already over
/// budget, coarser radii 2, 4, ... are tried until one fits. A
/// `delta_override` skips the scan.
pub fn net_params(
    points: &[Vec<f64>],
    metric: Metric,
    p: u32,
    delta_override: Option<f64>,
) -> Result<NetParams> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty candidate set has no net".into()));
    }
    let budget = 2f64.powf(f64::from(p) / 4.0);
    let (delta_p, net) = match delta_override {
        Some(delta) => (delta, greedy_net_points(points, metric, delta)?),
        None => {
            let mut delta = 1.0f64;
            let mut net = greedy_net_points(points, metric, delta)?;
            if net_cost(net.len()) <= budget {
                while net.len() < points.len() {
                    let finer = greedy_net_points(points, metric, delta / 2.0)?;
                    if net_cost(finer.len()) > budget {
                        break;
                    }
                    delta /= 2.0;
                    net = finer;
                }
            } else {
                while net_cost(net.len()) > budget {
                    delta *= 2.0;
                    if !delta.is_finite() {
                        return Err(Error::Overflow("net radius scan diverged".into()));
                    }
                    net = greedy_net_points(points, metric, delta)?;
                }
            }
            (delta, net)
        }
    };
    if net.is_empty() {
        return Err(Error::InvalidArgument(format!("empty net in category {p}")));
    }
    Ok(NetParams {
        p,
        delta_p,
        eta_p: strategy0_penalty(net.len(), p),
        epsilon_p: 2.0 * net_cost(net.len()).sqrt() / budget,
        net,
    })
}

/// Per-category strategy-0 action nets over metric candidates, computed on
/// first use.
#[derive(Debug, Clone)]
pub struct NetSchedule {
    points: Vec<Vec<f64>>,
    metric: Metric,
    delta_override: Option<f64>,
    cache: BTreeMap<u32, (NetParams, Vec<ActionId>)>,
}

impl NetSchedule {
    pub fn new(space: &ActionSpace, delta_override: Option<f64>) -> Result<Self> {
        let ActionSpace::MetricCandidates { points, metric } = space else {
            return Err(Error::Config("uc_net_rule needs a metric_candidates action space".into()));
        };
        space.validate()?;
        if let Some(d) = delta_override {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Config(format!("net radius override {d} must be positive")));
            }
        }
        Ok(NetSchedule {
            points: points.clone(),
            metric: *metric,
            delta_override,
            cache: BTreeMap::new(),
        })
    }

    pub fn params(&mut self, p: u32) -> Result<&NetParams> {
        self.entry(p).map(|e| &e.0)
    }

    fn entry(&mut self, p: u32) -> Result<&(NetParams, Vec<ActionId>)> {
        if !self.cache.contains_key(&p) {
            let params = net_params(&self.points, self.metric, p, self.delta_override)?;
            let actions = params.net.iter().copied().map(ActionId).collect();
            self.cache.insert(p, (params, actions));
        }
        Ok(&self.cache[&p])
    }
}

impl Strategy0Actions for NetSchedule {
    fn actions(&mut self, p: u32) -> Result<&[ActionId]> {
        self.entry(p).map(|e| e.1.as_slice())
    }
}

/// The universal rule with strategy 0 restricted to the delta_p-net of each
/// category; strategy 1 keeps policies over every candidate.
pub fn uc_net_rule(
    space: &ActionSpace,
    domain: ContextDomain,
    seed: u64,
    delta_override: Option<f64>,
) -> Result<UniversalRule> {
    let schedule = NetSchedule::new(space, delta_override)?;
    UniversalRule::with_strategy0_actions("uc_net_rule", Box::new(schedule), space.len(), domain, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn two_points_at_unit_distance() {
        let pts = line(&[0.0, 1.0]);
        for p in 0..=1 {
            let np = net_params(&pts, Metric::Euclidean, p, None).unwrap();
            assert_eq!(np.delta_p, 1.0);
            assert_eq!(np.net, vec![0]);
        }
        // 2 ln 2 <= 2^{p/4} first holds at p = 2
        let np = net_params(&pts, Metric::Euclidean, 2, None).unwrap();
        assert_eq!(np.delta_p, 0.5);
        assert_eq!(np.net, vec![0, 1]);
    }

    #[test]
    fn large_p_saturates() {
        let pts = line(&[0.0, 0.3, 0.31, 0.8, 0.9]);
        let np = net_params(&pts, Metric::Euclidean, 60, None).unwrap();
        assert_eq!(np.net, vec![0, 1, 2, 3, 4]);
        assert!(np.delta_p < 0.01);
    }

    #[test]
    fn coarse_radius_when_unit_is_over_budget() {
        let pts = line(&[0.0, 3.0, 6.0, 9.0]);
        let np = net_params(&pts, Metric::Euclidean, 0, None).unwrap();
        assert_eq!(np.net.len(), 1);
        assert!(np.delta_p >= 8.0);
    }

    #[test]
    fn epsilon_bound_and_counterexample() {
        let pts = line(&[0.0, 1.0]);
        let np = net_params(&pts, Metric::Euclidean, 4, None).unwrap();
        assert_eq!(np.net.len(), 2);
        assert!((np.epsilon_p - 2.0 * (2.0 * 2f64.ln()).sqrt() / 2.0).abs() < 1e-12);
        assert!(np.epsilon_p > 2f64.powf(-1.5));
        assert!(np.epsilon_p <= 2f64.powf(1.0 - 0.5));
    }

    #[test]
    fn eta_uses_net_size() {
        let pts = line(&[0.0, 1.0]);
        let np = net_params(&pts, Metric::Euclidean, 4, None).unwrap();
        assert!((np.eta_p - 10.0 * (2.0 * 2f64.ln()).sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_candidates_error() {
        assert!(net_params(&[], Metric::Euclidean, 0, None).is_err());
    }

    #[test]
    fn schedule_needs_metric_space() {
        assert!(NetSchedule::new(&ActionSpace::finite(3).unwrap(), None).is_err());
    }

    proptest! {
        #[test]
        fn delta_is_monotone_and_epsilon_bounded(
            xs in prop::collection::btree_set(0u32..1000, 1..30),
        ) {
            let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![f64::from(*x) / 1000.0]).collect();
            let mut prev = f64::INFINITY;
            for p in 0..40u32 {
                let np = net_params(&pts, Metric::Euclidean, p, None).unwrap();
                prop_assert!(np.delta_p <= prev);
                prev = np.delta_p;
                prop_assert!(np.epsilon_p <= 2f64.powf(1.0 - f64::from(p) / 8.0) + 1e-12);
                prop_assert!(net_cost(np.net.len()) <= 2f64.powf(f64::from(p) / 4.0) + 1e-12);
            }
        }
    }
}

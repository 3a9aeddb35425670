//! Reward mechanisms with sampling and exact conditional means.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{ActionId, ActionSpace, ContextPoint, Partition, RewardSample};
use crate::error::{Error, Result};
use crate::metric::lex_argmax;
use crate::rng::{derive_seed, SeededRng};

/// How each cell's hidden target action is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Targets {
    /// `actions[cell]` is the target of that cell.
    Fixed { actions: Vec<usize> },
    /// Uniform over the needle set, hashed from a seed and the cell. Without a
    /// seed the run seed is used, giving fresh targets per replication.
    Hashed {
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// Magnitudes M_i of the unbounded mechanism, indexed by cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Magnitudes {
    Fixed { values: Vec<f64> },
    /// M_1 = 2 T_1 and M_{i+1} = 2 T_{i+1} + 4 T_{i+1} (M_1 + ... + M_i).
    Recursive { horizons: Vec<f64> },
}

impl Magnitudes {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Magnitudes::Fixed { values } => {
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::Config("magnitudes must be finite and nonnegative".into()));
                }
                Ok(values.clone())
            }
            Magnitudes::Recursive { horizons } => {
                let mut out = Vec::with_capacity(horizons.len());
                let mut sum = 0.0f64;
                for (i, t) in horizons.iter().enumerate() {
                    let m = 2.0 * t + 4.0 * t * sum;
                    if !m.is_finite() {
                        return Err(Error::Overflow(format!(
                            "magnitude M_{} is not representable",
                            i + 1
                        )));
                    }
                    out.push(m);
                    sum += m;
                }
                Ok(out)
            }
        }
    }
}

/// A reward mechanism. `partition` maps contexts to the cells the mechanism
/// is defined on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mechanism {
    /// Bernoulli rewards with mean `means[cell][action]`.
    BernoulliTable {
        #[serde(default)]
        partition: Partition,
        means: Vec<Vec<f64>>,
    },
    /// Deterministic reward 1[a = a*_cell].
    Needle {
        #[serde(default)]
        partition: Partition,
        /// Candidate targets; all actions when omitted.
        #[serde(default)]
        needle_set: Option<Vec<usize>>,
        targets: Targets,
    },
    /// Deterministic max(0, 1 - 2 d(a, a*_cell) / eps), with eps the minimum
    /// pairwise distance inside the needle set.
    TentContinuous {
        #[serde(default)]
        partition: Partition,
        #[serde(default)]
        needle_set: Option<Vec<usize>>,
        targets: Targets,
    },
    /// M_cell (1 + s u) with a fair sign s, u = min(d(a, a0), d(a0, a1)) / d(a0, a1).
    ZeroMeanUnbounded {
        #[serde(default)]
        partition: Partition,
        magnitudes: Magnitudes,
        anchors: [usize; 2],
    },
    /// Bernoulli rewards with mean max(0, 1 - L d(a, peak_cell)).
    LipschitzUc {
        #[serde(default)]
        partition: Partition,
        peaks: Vec<Vec<f64>>,
        lipschitz: f64,
    },
}

impl Mechanism {
    pub fn partition(&self) -> &Partition {
        match self {
            Mechanism::BernoulliTable { partition, .. }
            | Mechanism::Needle { partition, .. }
            | Mechanism::TentContinuous { partition, .. }
            | Mechanism::ZeroMeanUnbounded { partition, .. }
            | Mechanism::LipschitzUc { partition, .. } => partition,
        }
    }

    /// True when samples may leave [0, 1].
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Mechanism::ZeroMeanUnbounded { .. })
    }
}

#[derive(Debug, Clone)]
enum Bound {
    Table(Vec<Vec<f64>>),
    Needle { set: Vec<usize>, targets: Resolved },
    Tent { set: Vec<usize>, targets: Resolved, width: f64 },
    Unbounded { magnitudes: Vec<f64>, a0: ActionId, a1: ActionId, span: f64 },
    Lipschitz { peaks: Vec<Vec<f64>>, lipschitz: f64 },
}

#[derive(Debug, Clone)]
enum Resolved {
    Fixed(Vec<usize>),
    Hashed(u64),
}

impl Resolved {
    fn target(&self, cell: u64, set: &[usize]) -> Result<ActionId> {
        match self {
            Resolved::Fixed(t) => t.get(cell as usize).copied().map(ActionId).ok_or_else(|| {
                Error::OutOfDomain(format!("no target for cell {cell}"))
            }),
            Resolved::Hashed(seed) => {
                let k = derive_seed(*seed, &[cell]) % set.len() as u64;
                Ok(ActionId(set[k as usize]))
            }
        }
    }
}

/// A mechanism bound to an action space, ready to sample.
#[derive(Debug, Clone)]
pub struct RewardModel {
    space: ActionSpace,
    mechanism: Mechanism,
    bound: Bound,
}

fn resolve_set(space: &ActionSpace, set: &Option<Vec<usize>>) -> Result<Vec<usize>> {
    let set = set.clone().unwrap_or_else(|| (0..space.len()).collect());
    if set.is_empty() {
        return Err(Error::Config("empty needle set".into()));
    }
    if let Some(a) = set.iter().find(|a| **a >= space.len()) {
        return Err(Error::Config(format!("needle action {a} outside the action space")));
    }
    Ok(set)
}

fn resolve_targets(targets: &Targets, space: &ActionSpace, run_seed: u64) -> Result<Resolved> {
    Ok(match targets {
        Targets::Fixed { actions } => {
            if let Some(a) = actions.iter().find(|a| **a >= space.len()) {
                return Err(Error::Config(format!("target {a} outside the action space")));
            }
            Resolved::Fixed(actions.clone())
        }
        Targets::Hashed { seed } => Resolved::Hashed(seed.unwrap_or(run_seed)),
    })
}

impl RewardModel {
    /// `run_seed` feeds hashed targets that carry no seed of their own.
    pub fn new(space: ActionSpace, mechanism: Mechanism, run_seed: u64) -> Result<Self> {
        space.validate()?;
        let bound = match &mechanism {
            Mechanism::BernoulliTable { means, .. } => {
                for row in means {
                    if row.len() != space.len() {
                        return Err(Error::Config(format!(
                            "mean row has {} entries for {} actions",
                            row.len(),
                            space.len()
                        )));
                    }
                    if row.iter().any(|m| !(0.0..=1.0).contains(m)) {
                        return Err(Error::Config("Bernoulli means must lie in [0, 1]".into()));
                    }
                }
                Bound::Table(means.clone())
            }
            Mechanism::Needle {
                needle_set,
                targets,
                ..
            } => Bound::Needle {
                set: resolve_set(&space, needle_set)?,
                targets: resolve_targets(targets, &space, run_seed)?,
            },
            Mechanism::TentContinuous {
                needle_set,
                targets,
                ..
            } => {
                let set = resolve_set(&space, needle_set)?;
                if set.len() < 2 {
                    return Err(Error::Config("tent needle set needs two actions".into()));
                }
                let mut width = f64::INFINITY;
                for (i, a) in set.iter().enumerate() {
                    for b in &set[i + 1..] {
                        width = width.min(space.distance(ActionId(*a), ActionId(*b))?);
                    }
                }
                if !(width > 0.0) {
                    return Err(Error::Config("tent needle set has repeated actions".into()));
                }
                let targets = resolve_targets(targets, &space, run_seed)?;
                if let Resolved::Fixed(t) = &targets {
                    if t.iter().any(|a| !set.contains(a)) {
                        return Err(Error::Config("tent targets must lie in the needle set".into()));
                    }
                }
                Bound::Tent { set, targets, width }
            }
            Mechanism::ZeroMeanUnbounded {
                magnitudes,
                anchors,
                ..
            } => {
                let (a0, a1) = (ActionId(anchors[0]), ActionId(anchors[1]));
                let span = space.distance(a0, a1)?;
                if !(span > 0.0) {
                    return Err(Error::Config("anchor actions must differ".into()));
                }
                Bound::Unbounded {
                    magnitudes: magnitudes.values()?,
                    a0,
                    a1,
                    span,
                }
            }
            Mechanism::LipschitzUc {
                peaks, lipschitz, ..
            } => {
                let ActionSpace::MetricCandidates { points, .. } = &space else {
                    return Err(Error::Config("lipschitz_uc needs metric candidates".into()));
                };
                let dim = points[0].len();
                if peaks.iter().any(|p| p.len() != dim) {
                    return Err(Error::Config("peak dimension differs from the candidates".into()));
                }
                if !(*lipschitz >= 0.0) || !lipschitz.is_finite() {
                    return Err(Error::Config("Lipschitz modulus must be finite and >= 0".into()));
                }
                Bound::Lipschitz {
                    peaks: peaks.clone(),
                    lipschitz: *lipschitz,
                }
            }
        };
        Ok(RewardModel {
            space,
            mechanism,
            bound,
        })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }

    /// Tent width eps, for tent mechanisms.
    pub fn tent_width(&self) -> Option<f64> {
        match &self.bound {
            Bound::Tent { width, .. } => Some(*width),
            _ => None,
        }
    }

    /// Hidden target of the context's cell, for needle and tent mechanisms.
    pub fn target(&self, x: &ContextPoint) -> Result<Option<ActionId>> {
        let cell = self.mechanism.partition().cell(x)?;
        match &self.bound {
            Bound::Needle { set, targets } | Bound::Tent { set, targets, .. } => {
                targets.target(cell, set).map(Some)
            }
            _ => Ok(None),
        }
    }

    fn check_action(&self, a: ActionId) -> Result<()> {
        if !self.space.contains(a) {
            return Err(Error::OutOfDomain(format!(
                "action {a} outside a space of {} actions",
                self.space.len()
            )));
        }
        Ok(())
    }

    /// Exact conditional mean reward of action `a` at context `x`.
    pub fn mean(&self, a: ActionId, x: &ContextPoint) -> Result<f64> {
        self.check_action(a)?;
        let cell = self.mechanism.partition().cell(x)?;
        match &self.bound {
            Bound::Table(means) => means
                .get(cell as usize)
                .map(|row| row[a.0])
                .ok_or_else(|| Error::OutOfDomain(format!("no mean row for cell {cell}"))),
            Bound::Needle { set, targets } => {
                Ok(if targets.target(cell, set)? == a { 1.0 } else { 0.0 })
            }
            Bound::Tent { set, targets, width } => {
                let d = self.space.distance(a, targets.target(cell, set)?)?;
                Ok((1.0 - 2.0 * d / width).max(0.0))
            }
            Bound::Unbounded { magnitudes, .. } => magnitudes
                .get(cell as usize)
                .copied()
                .ok_or_else(|| Error::OutOfDomain(format!("no magnitude for cell {cell}"))),
            Bound::Lipschitz { peaks, lipschitz } => {
                let peak = peaks
                    .get(cell as usize)
                    .ok_or_else(|| Error::OutOfDomain(format!("no peak for cell {cell}")))?;
                let ActionSpace::MetricCandidates { points, metric } = &self.space else {
                    unreachable!("checked at construction");
                };
                Ok((1.0 - lipschitz * metric.distance(&points[a.0], peak)).max(0.0))
            }
        }
    }

    /// One reward draw for action `a` at context `x`.
    pub fn sample(&self, a: ActionId, x: &ContextPoint, rng: &mut SeededRng) -> Result<RewardSample> {
        let mean = self.mean(a, x)?;
        match &self.bound {
            Bound::Table(_) | Bound::Lipschitz { .. } => {
                RewardSample::bounded(if rng.bernoulli(mean) { 1.0 } else { 0.0 })
            }
            Bound::Needle { .. } | Bound::Tent { .. } => RewardSample::bounded(mean),
            Bound::Unbounded { a0, a1, span, .. } => {
                let u = self.space.distance(a, *a0)?.min(self.space.distance(*a0, *a1)?) / span;
                let sign = if rng.bernoulli(0.5) { 1.0 } else { -1.0 };
                RewardSample::unbounded(mean * (1.0 + sign * u))
            }
        }
    }

    /// pi*(x): the lexicographically first action of maximal mean.
    pub fn optimal_action(&self, x: &ContextPoint) -> Result<ActionId> {
        let actions: Vec<ActionId> = self.space.actions().collect();
        let means = actions
            .iter()
            .map(|a| self.mean(*a, x))
            .collect::<Result<Vec<_>>>()?;
        lex_argmax(&means, &actions)
    }

    /// pi* tabled over a list of contexts.
    pub fn optimal_policy(&self, contexts: &[ContextPoint]) -> Result<HashMap<u64, ActionId>> {
        contexts
            .iter()
            .map(|x| Ok((x.id, self.optimal_action(x)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;

    fn line(xs: &[f64]) -> ActionSpace {
        ActionSpace::metric(xs.iter().map(|x| vec![*x]).collect(), Metric::Euclidean).unwrap()
    }

    fn needle() -> RewardModel {
        RewardModel::new(
            ActionSpace::finite(4).unwrap(),
            Mechanism::Needle {
                partition: Partition::Identity,
                needle_set: None,
                targets: Targets::Fixed {
                    actions: vec![2, 0, 3],
                },
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn needle_is_an_indicator() {
        let m = needle();
        let x = ContextPoint::new(0);
        assert_eq!(m.mean(ActionId(2), &x).unwrap(), 1.0);
        for a in [0, 1, 3] {
            assert_eq!(m.mean(ActionId(a), &x).unwrap(), 0.0);
        }
        assert_eq!(m.optimal_action(&ContextPoint::new(2)).unwrap(), ActionId(3));
        assert!(m.mean(ActionId(0), &ContextPoint::new(5)).is_err());
        assert!(m.mean(ActionId(9), &x).is_err());
    }

    #[test]
    fn hashed_targets_stay_in_the_needle_set() {
        let m = RewardModel::new(
            ActionSpace::finite(10).unwrap(),
            Mechanism::Needle {
                partition: Partition::Identity,
                needle_set: Some(vec![3, 5, 7, 9]),
                targets: Targets::Hashed { seed: None },
            },
            42,
        )
        .unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for id in 0..200 {
            let t = m.target(&ContextPoint::new(id)).unwrap().unwrap();
            seen.insert(t.0);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![3, 5, 7, 9]);
    }

    #[test]
    fn tent_values() {
        let m = RewardModel::new(
            line(&[0.0, 0.1, 0.4, 1.0, 1.2]),
            Mechanism::TentContinuous {
                partition: Partition::Identity,
                needle_set: Some(vec![0, 3]),
                targets: Targets::Fixed { actions: vec![3] },
            },
            0,
        )
        .unwrap();
        let x = ContextPoint::new(0);
        assert_eq!(m.tent_width(), Some(1.0));
        assert_eq!(m.mean(ActionId(3), &x).unwrap(), 1.0);
        // d = eps / 4
        let m2 = RewardModel::new(
            line(&[0.0, 0.25, 1.0]),
            Mechanism::TentContinuous {
                partition: Partition::Identity,
                needle_set: Some(vec![0, 2]),
                targets: Targets::Fixed { actions: vec![0] },
            },
            0,
        )
        .unwrap();
        assert!((m2.mean(ActionId(1), &x).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(m2.mean(ActionId(2), &x).unwrap(), 0.0);
        // d >= eps / 2
        assert_eq!(m.mean(ActionId(2), &x).unwrap(), 0.0);
    }

    #[test]
    fn tent_matches_needle_on_needle_points() {
        let space = line(&[0.0, 0.3, 0.7, 1.0]);
        let set = vec![0, 1, 2, 3];
        let targets = Targets::Hashed { seed: Some(11) };
        let tent = RewardModel::new(
            space.clone(),
            Mechanism::TentContinuous {
                partition: Partition::Identity,
                needle_set: Some(set.clone()),
                targets: targets.clone(),
            },
            0,
        )
        .unwrap();
        let nd = RewardModel::new(
            space,
            Mechanism::Needle {
                partition: Partition::Identity,
                needle_set: Some(set.clone()),
                targets,
            },
            0,
        )
        .unwrap();
        for id in 0..50 {
            let x = ContextPoint::new(id);
            for a in &set {
                assert_eq!(tent.mean(ActionId(*a), &x).unwrap(), nd.mean(ActionId(*a), &x).unwrap());
            }
        }
    }

    #[test]
    fn unbounded_at_anchor_is_deterministic() {
        let m = RewardModel::new(
            line(&[0.0, 1.0, 0.5]),
            Mechanism::ZeroMeanUnbounded {
                partition: Partition::Identity,
                magnitudes: Magnitudes::Fixed {
                    values: vec![3.0, 10.0],
                },
                anchors: [0, 1],
            },
            0,
        )
        .unwrap();
        let mut rng = SeededRng::new(1);
        let x = ContextPoint::new(1);
        for _ in 0..50 {
            assert_eq!(m.sample(ActionId(0), &x, &mut rng).unwrap().value(), 10.0);
            let v = m.sample(ActionId(2), &x, &mut rng).unwrap().value();
            assert!(v == 5.0 || v == 15.0);
        }
        // the mean is the same for every action
        for a in 0..3 {
            assert_eq!(m.mean(ActionId(a), &x).unwrap(), 10.0);
        }
    }

    #[test]
    fn recursive_magnitudes() {
        let m = Magnitudes::Recursive {
            horizons: vec![1.0, 2.0, 3.0],
        };
        // M1 = 2, M2 = 4 + 8*2 = 20, M3 = 6 + 12*22 = 270
        assert_eq!(m.values().unwrap(), vec![2.0, 20.0, 270.0]);
        let huge = Magnitudes::Recursive {
            horizons: vec![1e300; 4],
        };
        assert!(matches!(huge.values(), Err(Error::Overflow(_))));
    }

    #[test]
    fn ties_go_to_first_action() {
        let m = RewardModel::new(
            ActionSpace::finite(3).unwrap(),
            Mechanism::BernoulliTable {
                partition: Partition::Modulo { cells: 1 },
                means: vec![vec![0.4, 0.4, 0.4]],
            },
            0,
        )
        .unwrap();
        assert_eq!(m.optimal_action(&ContextPoint::new(8)).unwrap(), ActionId(0));
    }

    #[test]
    fn sample_means_match_oracle() {
        let space = line(&[0.0, 0.2, 0.5, 0.9]);
        let models = vec![
            RewardModel::new(
                ActionSpace::finite(3).unwrap(),
                Mechanism::BernoulliTable {
                    partition: Partition::Modulo { cells: 2 },
                    means: vec![vec![0.1, 0.5, 0.9], vec![0.3, 0.7, 0.2]],
                },
                0,
            )
            .unwrap(),
            needle(),
            RewardModel::new(
                space.clone(),
                Mechanism::TentContinuous {
                    partition: Partition::Modulo { cells: 3 },
                    needle_set: None,
                    targets: Targets::Hashed { seed: Some(1) },
                },
                0,
            )
            .unwrap(),
            RewardModel::new(
                space.clone(),
                Mechanism::ZeroMeanUnbounded {
                    partition: Partition::Modulo { cells: 3 },
                    magnitudes: Magnitudes::Fixed {
                        values: vec![1.0, 4.0, 9.0],
                    },
                    anchors: [1, 3],
                },
                0,
            )
            .unwrap(),
            RewardModel::new(
                space,
                Mechanism::LipschitzUc {
                    partition: Partition::Modulo { cells: 3 },
                    peaks: vec![vec![0.1], vec![0.5], vec![0.8]],
                    lipschitz: 1.5,
                },
                0,
            )
            .unwrap(),
        ];
        let n = 100_000;
        let mut pick = SeededRng::new(99);
        for (k, m) in models.iter().enumerate() {
            let mut rng = SeededRng::new(k as u64);
            for _ in 0..5 {
                let a = ActionId(pick.uniform_int(0, m.space().len() as u64 - 1) as usize);
                let x = ContextPoint::new(pick.uniform_int(0, 2));
                let mean = m.mean(a, &x).unwrap();
                let draws: Vec<f64> = (0..n)
                    .map(|_| m.sample(a, &x, &mut rng).unwrap().value())
                    .collect();
                let avg = draws.iter().sum::<f64>() / n as f64;
                let var = draws.iter().map(|d| (d - avg).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                assert!((avg - mean).abs() <= 4.0 * se + 1e-12, "model {k}: {avg} vs {mean}");
            }
        }
    }
}

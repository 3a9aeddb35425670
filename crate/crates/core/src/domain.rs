//! Shared domain types: contexts, traces, actions, rewards and partitions.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;

/// A context value. Identity is carried by `id`; `coords` are only used by
/// partitions and metric diagnostics, never for duplicate detection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContextPoint {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl ContextPoint {
    pub fn new(id: u64) -> Self {
        ContextPoint { id, coords: None }
    }

    pub fn with_coords(id: u64, coords: Vec<f64>) -> Self {
        ContextPoint {
            id,
            coords: Some(coords),
        }
    }
}

impl PartialEq for ContextPoint {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for ContextPoint {}

impl Hash for ContextPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

/// A realized context sequence X_1..X_T (index 0 holds round 1).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProcessTrace {
    pub points: Vec<ContextPoint>,
}

impl ProcessTrace {
    pub fn new(points: Vec<ContextPoint>) -> Self {
        ProcessTrace { points }
    }

    pub fn from_ids<I: IntoIterator<Item = u64>>(ids: I) -> Self {
        ProcessTrace {
            points: ids.into_iter().map(ContextPoint::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.points.iter().map(|p| p.id)
    }

    /// Context at round `t` (1-based).
    pub fn at(&self, t: usize) -> Option<&ContextPoint> {
        t.checked_sub(1).and_then(|i| self.points.get(i))
    }
}

/// Stable action index. `ActionId(0)` is the first action a_1.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The action set. Every variant exposes a finite list of indexed actions;
/// they differ in how learners are allowed to treat that list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpace {
    /// A genuinely finite action set, |A| >= 2.
    Finite { size: usize },
    /// The first `size` actions of a countable enumeration.
    CountablePrefix { size: usize },
    /// Candidate points of a metric action space.
    MetricCandidates { points: Vec<Vec<f64>>, metric: Metric },
}

impl ActionSpace {
    pub fn finite(size: usize) -> Result<Self> {
        let space = ActionSpace::Finite { size };
        space.validate()?;
        Ok(space)
    }

    pub fn countable_prefix(size: usize) -> Result<Self> {
        let space = ActionSpace::CountablePrefix { size };
        space.validate()?;
        Ok(space)
    }

    pub fn metric(points: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        let space = ActionSpace::MetricCandidates { points, metric };
        space.validate()?;
        Ok(space)
    }

    /// Checks the construction invariants. Deserialized spaces must be
    /// validated before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            ActionSpace::Finite { size } if *size < 2 => Err(Error::InvalidArgument(format!(
                "finite action space needs at least 2 actions, got {size}"
            ))),
            ActionSpace::CountablePrefix { size } if *size < 1 => Err(Error::InvalidArgument(
                "countable prefix must hold at least one action".into(),
            )),
            ActionSpace::MetricCandidates { points, metric } => {
                if points.is_empty() {
                    return Err(Error::InvalidArgument(
                        "metric action space has no candidates".into(),
                    ));
                }
                let dim = points[0].len();
                if points.iter().any(|p| p.len() != dim) {
                    return Err(Error::InvalidArgument(
                        "metric candidates have inconsistent dimensions".into(),
                    ));
                }
                verify_metric(points.len(), |i, j| metric.distance(&points[i], &points[j]))
            }
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ActionSpace::Finite { size } | ActionSpace::CountablePrefix { size } => *size,
            ActionSpace::MetricCandidates { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ActionSpace::Finite { .. })
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.len()).map(ActionId)
    }

    pub fn contains(&self, a: ActionId) -> bool {
        a.0 < self.len()
    }

    /// Distance between two actions. Non-metric spaces use the discrete
    /// metric (0 on the diagonal, 1 elsewhere).
    pub fn distance(&self, a: ActionId, b: ActionId) -> Result<f64> {
        if !self.contains(a) || !self.contains(b) {
            return Err(Error::OutOfDomain(format!(
                "action pair ({a}, {b}) outside a space of {} actions",
                self.len()
            )));
        }
        Ok(match self {
            ActionSpace::MetricCandidates { points, metric } => {
                metric.distance(&points[a.0], &points[b.0])
            }
            _ => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
        })
    }
}

/// Exhaustive pairwise check that `d` is symmetric, nonnegative, finite and
/// zero exactly on the diagonal.
pub fn verify_metric(n: usize, d: impl Fn(usize, usize) -> f64) -> Result<()> {
    for i in 0..n {
        for j in 0..n {
            let dij = d(i, j);
            if !dij.is_finite() || dij < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "distance({i}, {j}) = {dij} is not a finite nonnegative value"
                )));
            }
            if (i == j) != (dij == 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "distance({i}, {j}) = {dij} violates zero-iff-same-index"
                )));
            }
            if dij != d(j, i) {
                return Err(Error::InvalidArgument(format!(
                    "distance({i}, {j}) is not symmetric"
                )));
            }
        }
    }
    Ok(())
}

/// A received reward. Bounded samples live in [0, 1]; unbounded ones in [0, inf).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardSample {
    value: f64,
    bounded: bool,
}

impl RewardSample {
    pub fn bounded(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::RewardOutOfRange {
                value,
                range: "[0, 1]",
            });
        }
        Ok(RewardSample {
            value,
            bounded: true,
        })
    }

    pub fn unbounded(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::RewardOutOfRange {
                value,
                range: "[0, inf)",
            });
        }
        Ok(RewardSample {
            value,
            bounded: false,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    /// The value, provided it lies in [0, 1] whatever the flag says.
    pub fn unit_value(&self) -> Result<f64> {
        if (0.0..=1.0).contains(&self.value) {
            Ok(self.value)
        } else {
            Err(Error::RewardOutOfRange {
                value: self.value,
                range: "[0, 1]",
            })
        }
    }
}

/// Explicit context -> cell map.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Partition {
    /// Every context id is its own cell.
    #[default]
    Identity,
    /// cell = id mod `cells`.
    Modulo { cells: u64 },
    /// cell = floor(bins * coords[0]) for a first coordinate in [0, 1).
    Grid { bins: u64 },
    /// Table lookup; ids missing from the table are out of domain.
    Explicit { cells: BTreeMap<u64, u64> },
}

impl Partition {
    pub fn cell(&self, x: &ContextPoint) -> Result<u64> {
        match self {
            Partition::Identity => Ok(x.id),
            Partition::Modulo { cells } => {
                if *cells == 0 {
                    return Err(Error::InvalidArgument("modulo partition with 0 cells".into()));
                }
                Ok(x.id % cells)
            }
            Partition::Grid { bins } => {
                let c = x
                    .coords
                    .as_ref()
                    .and_then(|c| c.first().copied())
                    .ok_or_else(|| {
                        Error::OutOfDomain(format!("context {} has no coordinates", x.id))
                    })?;
                if !(0.0..1.0).contains(&c) {
                    return Err(Error::OutOfDomain(format!(
                        "grid coordinate {c} of context {} outside [0, 1)",
                        x.id
                    )));
                }
                Ok(((c * *bins as f64) as u64).min(bins.saturating_sub(1)))
            }
            Partition::Explicit { cells } => cells
                .get(&x.id)
                .copied()
                .ok_or_else(|| Error::OutOfDomain(format!("context {} has no cell", x.id))),
        }
    }

    /// Number of cells, when the partition has finitely many.
    pub fn cell_count(&self) -> Option<u64> {
        match self {
            Partition::Identity => None,
            Partition::Modulo { cells } => Some(*cells),
            Partition::Grid { bins } => Some(*bins),
            Partition::Explicit { cells } => cells.values().max().map(|m| m + 1).or(Some(0)),
        }
    }
}

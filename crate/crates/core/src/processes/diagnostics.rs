use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::domain::{ContextPoint, Partition, ProcessTrace};
use crate::error::{Error, Result};

/// Rounds t whose context has occurred at most `m` times in X_1..X_t.
pub fn dedup_times(trace: &ProcessTrace, m: u64) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("dedup multiplicity must be >= 1".into()));
    }
    let mut counts: HashMap<u64, u64> = HashMap::new();
    let mut kept = Vec::new();
    for (i, x) in trace.points.iter().enumerate() {
        let c = counts.entry(x.id).or_insert(0);
        *c += 1;
        if *c <= m {
            kept.push(i as u64 + 1);
        }
    }
    Ok(kept)
}

/// Powers of two below `horizon`, then `horizon` itself.
pub fn geometric_grid(horizon: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..64)
        .map(|k| 1u64 << k)
        .take_while(|t| *t < horizon)
        .collect();
    if horizon >= 1 {
        grid.push(horizon);
    }
    grid
}

/// (T, #{cells met by X_1..X_T} / T) at each grid point T <= len(trace).
pub fn distinct_cell_curve(
    trace: &ProcessTrace,
    partition: &Partition,
    grid: &[u64],
) -> Result<Vec<(u64, f64)>> {
    let mut want: Vec<u64> = grid
        .iter()
        .copied()
        .filter(|t| *t >= 1 && *t as usize <= trace.len())
        .collect();
    want.sort_unstable();
    want.dedup();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(want.len());
    let mut next = want.iter().peekable();
    for (i, x) in trace.points.iter().enumerate() {
        seen.insert(partition.cell(x)?);
        let t = i as u64 + 1;
        if next.peek() == Some(&&t) {
            out.push((t, seen.len() as f64 / t as f64));
            next.next();
        }
    }
    Ok(out)
}

/// max over T in `window` of (1/T) #{t <= T : X_t in A}.
pub fn empirical_submeasure(
    trace: &ProcessTrace,
    indicator: impl Fn(&ContextPoint) -> bool,
    window: &[u64],
) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    if let Some(bad) = window.iter().find(|t| **t == 0 || **t as usize > trace.len()) {
        return Err(Error::InvalidArgument(format!(
            "window round {bad} outside [1, {}]",
            trace.len()
        )));
    }
    let mut prefix = Vec::with_capacity(trace.len() + 1);
    prefix.push(0u64);
    for x in &trace.points {
        prefix.push(prefix.last().unwrap() + u64::from(indicator(x)));
    }
    Ok(window
        .iter()
        .map(|t| prefix[*t as usize] as f64 / *t as f64)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Per-cell visit thresholds N_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Thresholds {
    Uniform { n: u64 },
    PerCell { cells: BTreeMap<u64, u64> },
}

impl Thresholds {
    fn get(&self, cell: u64) -> Result<u64> {
        match self {
            Thresholds::Uniform { n } => Ok(*n),
            Thresholds::PerCell { cells } => cells
                .get(&cell)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("no threshold for cell {cell}"))),
        }
    }
}

/// (1/T) #{t : fewer than N_{i_t} distinct earlier contexts share the cell of X_t}.
pub fn infrequent_mass(
    trace: &ProcessTrace,
    partition: &Partition,
    thresholds: &Thresholds,
) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::InvalidArgument("infrequent mass of an empty trace".into()));
    }
    let mut members: HashMap<u64, HashSet<u64>> = HashMap::new();
    let mut hits = 0u64;
    for x in &trace.points {
        let cell = partition.cell(x)?;
        let n = thresholds.get(cell)?;
        let prior = members.entry(cell).or_default();
        if (prior.len() as u64) < n {
            hits += 1;
        }
        prior.insert(x.id);
    }
    Ok(hits as f64 / trace.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abaa() -> ProcessTrace {
        ProcessTrace::from_ids([0, 1, 0, 0])
    }

    #[test]
    fn dedup_examples() {
        assert_eq!(dedup_times(&abaa(), 1).unwrap(), vec![1, 2]);
        assert_eq!(dedup_times(&abaa(), 2).unwrap(), vec![1, 2, 3]);
        assert!(dedup_times(&abaa(), 0).is_err());
        let fresh = ProcessTrace::from_ids(1..=30);
        assert_eq!(dedup_times(&fresh, 1).unwrap().len(), 30);
    }

    #[test]
    fn distinct_cells_examples() {
        let walk = ProcessTrace::from_ids(1..=64);
        let curve = distinct_cell_curve(&walk, &Partition::Identity, &geometric_grid(64)).unwrap();
        assert!(curve.iter().all(|(_, r)| *r == 1.0));
        let single = distinct_cell_curve(
            &walk,
            &Partition::Modulo { cells: 1 },
            &geometric_grid(64),
        )
        .unwrap();
        assert!(single.iter().all(|(t, r)| *r == 1.0 / *t as f64));
    }

    #[test]
    fn submeasure_examples() {
        let alt = ProcessTrace::from_ids((0..100).map(|i| i % 2));
        let evens: Vec<u64> = (1..=50).map(|k| 2 * k).collect();
        assert_eq!(empirical_submeasure(&alt, |x| x.id == 0, &evens).unwrap(), 0.5);
        assert_eq!(empirical_submeasure(&alt, |_| true, &evens).unwrap(), 1.0);
        assert_eq!(empirical_submeasure(&alt, |_| false, &evens).unwrap(), 0.0);
        assert!(empirical_submeasure(&alt, |_| true, &[]).is_err());
    }

    #[test]
    fn infrequent_examples() {
        let walk = ProcessTrace::from_ids(1..=100);
        let none = Thresholds::Uniform { n: 0 };
        let one = Thresholds::Uniform { n: 1 };
        assert_eq!(infrequent_mass(&walk, &Partition::Identity, &none).unwrap(), 0.0);
        assert_eq!(infrequent_mass(&walk, &Partition::Identity, &one).unwrap(), 1.0);
        let missing = Thresholds::PerCell {
            cells: BTreeMap::from([(1, 1)]),
        };
        assert!(infrequent_mass(&walk, &Partition::Identity, &missing).is_err());
    }

    proptest! {
        #[test]
        fn dedup_is_nested_and_duplicate_free(ids in prop::collection::vec(0u64..8, 1..120), m in 1u64..6) {
            let tr = ProcessTrace::from_ids(ids.clone());
            let a = dedup_times(&tr, m).unwrap();
            let b = dedup_times(&tr, m + 1).unwrap();
            prop_assert!(a.iter().all(|t| b.contains(t)));
            let d1 = dedup_times(&tr, 1).unwrap();
            let sub: Vec<u64> = d1.iter().map(|t| ids[*t as usize - 1]).collect();
            let uniq: HashSet<u64> = sub.iter().copied().collect();
            prop_assert_eq!(uniq.len(), sub.len());
            let full = dedup_times(&tr, ids.len() as u64).unwrap();
            prop_assert_eq!(full.len(), ids.len());
        }
    }
}

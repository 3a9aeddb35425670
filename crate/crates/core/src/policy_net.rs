//! A concrete countable policy family pi^1, pi^2, ... over a partitioned
//! context domain.
//!
//! Policy l is a finite-support map: it assigns actions from the prefix
//! A_m = {a_1..a_m} to the first s cells and plays a_1 everywhere else. Codes
//! are enumerated by increasing s + m, then by s, then lexicographically.
//! A code is admitted only if its last coded cell is not a_1 and it uses a_m,
//! so every finite-support map appears exactly once. For a finite domain of n
//! cells and K actions this lists all K^n maps and then wraps around.

use serde::{Deserialize, Serialize};

use crate::domain::{ActionId, ContextPoint, Partition, ProcessTrace};
use crate::error::{Error, Result};

/// Context domain the family is built over: contexts are mapped to cells and
/// policies are functions of the cell.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDomain {
    #[serde(default)]
    pub partition: Partition,
}

impl ContextDomain {
    pub fn new(partition: Partition) -> Self {
        ContextDomain { partition }
    }

    pub fn cell_count(&self) -> Option<u64> {
        self.partition.cell_count()
    }
}

/// One decoded policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    index: u64,
    assignment: Vec<ActionId>,
}

impl Policy {
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Actions assigned to cells 0..s.
    pub fn assignment(&self) -> &[ActionId] {
        &self.assignment
    }

    pub fn evaluate_cell(&self, cell: u64) -> ActionId {
        usize::try_from(cell)
            .ok()
            .and_then(|c| self.assignment.get(c).copied())
            .unwrap_or(ActionId(0))
    }
}

fn pow_sat(base: u128, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

/// Ways to fill `r` remaining code positions over an alphabet of `m` actions,
/// where the final position must not be a_1 and a_m must appear unless it
/// already has.
fn completions(r: u64, seen_top: bool, m: u64) -> u128 {
    if r == 0 {
        return u128::from(seen_top);
    }
    let m = m as u128;
    let all = (m - 1).saturating_mul(pow_sat(m, r - 1));
    if seen_top {
        all
    } else {
        let without_top = (m - 2).saturating_mul(pow_sat(m - 1, r - 1));
        if all == u128::MAX {
            u128::MAX
        } else {
            all - without_top
        }
    }
}

/// Decodes policy indices for a domain with an optional finite number of
/// cells and `actions` actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyEnumerator {
    cells: Option<u64>,
    actions: u64,
}

impl PolicyEnumerator {
    pub fn new(cells: Option<u64>, actions: usize) -> Result<Self> {
        if actions == 0 {
            return Err(Error::InvalidArgument(
                "policy family over an empty action set".into(),
            ));
        }
        Ok(PolicyEnumerator {
            cells,
            actions: actions as u64,
        })
    }

    fn admissible(&self, s: u64, m: u64) -> bool {
        if s == 0 {
            return m == 1;
        }
        m >= 2 && m <= self.actions && self.cells.map_or(true, |c| s <= c)
    }

    fn block_size(&self, s: u64, m: u64) -> u128 {
        if s == 0 {
            1
        } else {
            completions(s, false, m)
        }
    }

    /// Number of distinct policies when the domain is finite.
    pub fn total(&self) -> Option<u128> {
        self.cells.map(|c| pow_sat(self.actions as u128, c))
    }

    /// Cell assignment of policy `l` (l >= 1; l = 0 is treated as 1).
    pub fn decode(&self, l: u64) -> Policy {
        let index = l.max(1);
        if self.actions == 1 {
            return Policy {
                index,
                assignment: Vec::new(),
            };
        }
        let mut rank = (index - 1) as u128;
        if let Some(total) = self.total() {
            if total < u128::MAX {
                rank %= total;
            }
        }
        let mut n = 1u64;
        loop {
            for s in 0..n {
                let m = n - s;
                if !self.admissible(s, m) {
                    continue;
                }
                let size = self.block_size(s, m);
                if rank < size {
                    return Policy {
                        index,
                        assignment: self.decode_block(s, m, rank),
                    };
                }
                rank -= size;
            }
            n += 1;
        }
    }

    fn decode_block(&self, s: u64, m: u64, mut rank: u128) -> Vec<ActionId> {
        let mut code = Vec::with_capacity(s as usize);
        let mut seen_top = false;
        for pos in 0..s {
            let last = pos + 1 == s;
            for d in 0..m {
                if last && d == 0 {
                    continue;
                }
                let seen = seen_top || d == m - 1;
                let c = completions(s - pos - 1, seen, m);
                if rank < c {
                    code.push(ActionId(d as usize));
                    seen_top = seen;
                    break;
                }
                rank -= c;
            }
        }
        code
    }
}

/// The family Pi over a context domain, with decoded policies cached.
#[derive(Debug, Clone)]
pub struct PolicyFamily {
    domain: ContextDomain,
    enumerator: PolicyEnumerator,
    cache: Vec<Policy>,
}

impl PolicyFamily {
    pub fn new(domain: ContextDomain, actions: usize) -> Result<Self> {
        let enumerator = PolicyEnumerator::new(domain.cell_count(), actions)?;
        Ok(PolicyFamily {
            domain,
            enumerator,
            cache: Vec::new(),
        })
    }

    pub fn domain(&self) -> &ContextDomain {
        &self.domain
    }

    pub fn enumerator(&self) -> PolicyEnumerator {
        self.enumerator
    }

    /// Policy l (1-based).
    pub fn policy(&mut self, l: u64) -> &Policy {
        let l = l.max(1);
        while (self.cache.len() as u64) < l {
            let next = self.cache.len() as u64 + 1;
            self.cache.push(self.enumerator.decode(next));
        }
        &self.cache[(l - 1) as usize]
    }

    pub fn evaluate(&mut self, l: u64, x: &ContextPoint) -> Result<ActionId> {
        let cell = self.domain.partition.cell(x)?;
        Ok(self.policy(l).evaluate_cell(cell))
    }
}

/// min over l <= n of the fraction of rounds where pi^l disagrees with `target`.
pub fn density_gap(
    family: &mut PolicyFamily,
    n: u64,
    target: impl Fn(&ContextPoint) -> Result<ActionId>,
    trace: &ProcessTrace,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("density gap over zero policies".into()));
    }
    if trace.is_empty() {
        return Err(Error::InvalidArgument("density gap over an empty trace".into()));
    }
    let targets: Vec<ActionId> = trace.points.iter().map(&target).collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for l in 1..=n {
        let mut misses = 0usize;
        for (x, want) in trace.points.iter().zip(&targets) {
            if family.evaluate(l, x)? != *want {
                misses += 1;
            }
        }
        best = best.min(misses as f64 / trace.len() as f64);
        if best == 0.0 {
            break;
        }
    }
    Ok(best)
}

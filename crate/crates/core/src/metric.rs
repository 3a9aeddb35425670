//! Metric utilities: distances, greedy nets and the lexicographic argmax.

use serde::{Deserialize, Serialize};

use crate::domain::ActionId;
use crate::error::{Error, Result};

/// Distance on real vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::Manhattan => diffs.sum(),
            Metric::Chebyshev => diffs.fold(0.0, f64::max),
        }
    }
}

/// Key of the maximal value; ties go to the smallest key.
pub fn lex_argmax(values: &[f64], keys: &[ActionId]) -> Result<ActionId> {
    if values.is_empty() || keys.is_empty() {
        return Err(Error::EmptyArgmax);
    }
    if values.len() != keys.len() {
        return Err(Error::InvalidArgument(format!(
            "argmax over {} values with {} keys",
            values.len(),
            keys.len()
        )));
    }
    let mut best = (values[0], keys[0]);
    for (&v, &k) in values.iter().zip(keys).skip(1) {
        if v > best.0 || (v == best.0 && k < best.1) {
            best = (v, k);
        }
    }
    Ok(best.1)
}

/// Greedy delta-net over `n` candidates, scanning in index order: a candidate
/// joins the net when it is farther than `delta` from every selected point.
/// The result covers every candidate within `delta` and is `delta`-separated.
pub fn greedy_net(
    n: usize,
    distance: impl Fn(usize, usize) -> f64,
    delta: f64,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument("greedy net over no candidates".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "net radius {delta} must be positive"
        )));
    }
    let mut net: Vec<usize> = vec![0];
    for c in 1..n {
        let mut covered = false;
        for &s in &net {
            let d = distance(c, s);
            if !d.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite distance between candidates {c} and {s}"
                )));
            }
            if d <= delta {
                covered = true;
                break;
            }
        }
        if !covered {
            net.push(c);
        }
    }
    Ok(net)
}

/// `greedy_net` over explicit points.
pub fn greedy_net_points(points: &[Vec<f64>], metric: Metric, delta: f64) -> Result<Vec<usize>> {
    greedy_net(
        points.len(),
        |i, j| metric.distance(&points[i], &points[j]),
        delta,
    )
}

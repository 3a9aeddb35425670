use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::domain::{ContextPoint, ProcessTrace};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// A context process X_1, X_2, ...
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// i.i.d. draws of context ids 0..n with the given weights.
    IidFinite { weights: Vec<f64> },
    /// A new context every round (id = t) with uniform coordinates in [0, 1)^dim.
    IidFresh {
        #[serde(default)]
        dim: usize,
    },
    /// Markov chain on ids 0..n; the initial law defaults to uniform.
    MarkovChain {
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        initial: Option<Vec<f64>>,
    },
    /// Finitely supported process: i.i.d. over `support` with `weights`, or a
    /// round-robin visit of the support when no weights are given.
    #[serde(alias = "finite_support_c3")]
    FiniteSupport {
        support: Vec<u64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// X_t = t, with coordinate [t].
    DeterministicWalk,
    /// Replays a trace file; the horizon must not exceed its length.
    Replay { path: PathBuf },
}

fn check_law(w: &[f64], what: &str) -> Result<()> {
    if w.is_empty() {
        return Err(Error::Config(format!("{what} is empty")));
    }
    if w.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::Config(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::IidFinite { weights } => check_law(weights, "iid_finite weights"),
            ProcessSpec::MarkovChain {
                transition,
                initial,
            } => {
                let n = transition.len();
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::Config(format!(
                            "transition row {i} has {} entries, expected {n}",
                            row.len()
                        )));
                    }
                    check_law(row, &format!("transition row {i}"))?;
                }
                if let Some(init) = initial {
                    if init.len() != n {
                        return Err(Error::Config("initial law length differs from chain size".into()));
                    }
                    check_law(init, "initial law")?;
                }
                if n == 0 {
                    return Err(Error::Config("markov chain without states".into()));
                }
                Ok(())
            }
            ProcessSpec::FiniteSupport { support, weights } => {
                if support.is_empty() {
                    return Err(Error::Config("finite_support with empty support".into()));
                }
                if let Some(w) = weights {
                    if w.len() != support.len() {
                        return Err(Error::Config("support and weights differ in length".into()));
                    }
                    check_law(w, "finite_support weights")?;
                }
                Ok(())
            }
            ProcessSpec::IidFresh { .. } | ProcessSpec::DeterministicWalk | ProcessSpec::Replay { .. } => {
                Ok(())
            }
        }
    }

    /// True when the process visits only finitely many contexts.
    pub fn finite_support(&self) -> Option<Vec<u64>> {
        match self {
            ProcessSpec::IidFinite { weights } => Some((0..weights.len() as u64).collect()),
            ProcessSpec::MarkovChain { transition, .. } => Some((0..transition.len() as u64).collect()),
            ProcessSpec::FiniteSupport { support, .. } => Some(support.clone()),
            _ => None,
        }
    }
}

/// Stateful sampler of a process.
#[derive(Debug, Clone)]
pub struct ProcessGenerator {
    spec: ProcessSpec,
    rng: SeededRng,
    state: Option<usize>,
    replay: Option<ProcessTrace>,
    t: u64,
}

impl ProcessGenerator {
    pub fn new(spec: ProcessSpec, rng: SeededRng) -> Result<Self> {
        spec.validate()?;
        let replay = match &spec {
            ProcessSpec::Replay { path } => Some(super::read_trace_file(path)?),
            _ => None,
        };
        Ok(ProcessGenerator {
            spec,
            rng,
            state: None,
            replay,
            t: 0,
        })
    }

    /// X_{t+1}.
    pub fn next_context(&mut self) -> Result<ContextPoint> {
        self.t += 1;
        let t = self.t;
        Ok(match &self.spec {
            ProcessSpec::IidFinite { weights } => ContextPoint::new(self.rng.categorical(weights) as u64),
            ProcessSpec::IidFresh { dim } => {
                if *dim == 0 {
                    ContextPoint::new(t)
                } else {
                    let coords = (0..*dim).map(|_| self.rng.uniform()).collect();
                    ContextPoint::with_coords(t, coords)
                }
            }
            ProcessSpec::MarkovChain {
                transition,
                initial,
            } => {
                let next = match (self.state, initial) {
                    (Some(s), _) => self.rng.categorical(&transition[s]),
                    (None, Some(init)) => self.rng.categorical(init),
                    (None, None) => self.rng.uniform_int(0, transition.len() as u64 - 1) as usize,
                };
                self.state = Some(next);
                ContextPoint::new(next as u64)
            }
            ProcessSpec::FiniteSupport { support, weights } => match weights {
                Some(w) => ContextPoint::new(support[self.rng.categorical(w)]),
                None => ContextPoint::new(support[((t - 1) % support.len() as u64) as usize]),
            },
            ProcessSpec::DeterministicWalk => ContextPoint::with_coords(t, vec![t as f64]),
            ProcessSpec::Replay { path } => self
                .replay
                .as_ref()
                .and_then(|tr| tr.at(t as usize))
                .cloned()
                .ok_or_else(|| {
                    Error::Config(format!("trace {} ends before round {t}", path.display()))
                })?,
        })
    }
}

/// X_1..X_horizon.
pub fn generate(spec: &ProcessSpec, horizon: u64, rng: SeededRng) -> Result<ProcessTrace> {
    let mut g = ProcessGenerator::new(spec.clone(), rng)?;
    let points = (0..horizon).map(|_| g.next_context()).collect::<Result<_>>()?;
    Ok(ProcessTrace::new(points))
}

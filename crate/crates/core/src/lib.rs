//! Optimistically universal learning rules for contextual bandits.
//!
//! The crate provides the adversarial bandit primitives (EXP3, EXP3.IX,
//! EXPINF), the universal rule for finite action sets with its category and
//! period schedule, rules for countable, continuous, uniformly-continuous and
//! unbounded settings, context-process generators with duplicate and cell
//! diagnostics, reward mechanisms with exact mean oracles, and a seeded
//! experiment harness.

pub mod bandits;
pub mod domain;
pub mod error;
pub mod harness;
pub mod learner;
pub mod metric;
pub mod policy_net;
pub mod processes;
pub mod rewards;
pub mod rng;
pub mod universal;
pub mod variants;

pub use domain::{ActionId, ActionSpace, ContextPoint, Partition, ProcessTrace, RewardSample};
pub use error::{Error, Result};
pub use learner::{Learner, Purpose, Regime, RoundInfo};
pub use rng::SeededRng;

//! Learning rules beyond the finite-action universal rule.

mod basic;
mod countable;
mod uc_net;
mod unbounded;

pub use basic::{Exp3Rule, Exp3IxRule, ExpInfRule, OracleRule};
pub use countable::CountableRule;
pub use uc_net::{net_params, uc_net_rule, NetParams, NetSchedule};
pub use unbounded::{RewardScale, UnboundedRule};

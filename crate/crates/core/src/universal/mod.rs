//! The optimistically universal learning rule for finite action sets.

mod rule;
pub mod schedule;

pub use rule::{
    Estimators, FullActionSet, PurposeMemo, Strategy, Strategy0Actions, StrategyDecision,
    UniversalRule,
};
pub use schedule::{category, exploration_probability, period_of, period_start};

//! Storage budget allocation for minimal recovery delay in mobile networks.
//!
//! A unit-size object is encoded and spread over `n` nodes subject to a
//! total storage budget `T`; a collector recovers it once the nodes it has
//! met hold at least one object's worth of coded data. This crate evaluates
//! recovery probability and expected delay of allocations, picks the best
//! symmetric allocation, and models the coded spray-and-wait protocol that
//! realizes symmetric allocations in practice.

pub mod analytics;
pub mod budget;
pub mod delay;
pub mod numeric;
pub mod protocol;

pub use budget::{Budget, BudgetError};
pub use delay::{DelayDistribution, DistributionError};

//! Recovery probability and expected recovery delay of storage allocations
//! under i.i.d. exponential first-contact times.

mod exact;
mod model;
mod monte_carlo;
mod optimal;
mod symmetric;

pub use exact::{count_recoverable_subsets, expected_delay_exact, recovery_probability_exact, SubsetEnumerator};
pub use model::{
    Allocation, AnalyticsError, ContactModel, RegimeAssessment, RegimeHint, Result, SymmetricAllocation, TheoremParams,
    DEFAULT_ENUMERATION_LIMIT, RECOVERY_TOLERANCE,
};
pub use monte_carlo::monte_carlo_delay;
pub use optimal::{
    candidate_ms, expected_delay_lower_bound, optimal_symmetric_m, regime_hint, spreading_comparison, theorem_params,
    CandidateProbability, OptimalSymmetric, SpreadingComparison,
};
pub use symmetric::{
    contact_probability, expected_delay_symmetric, recovery_probability_symmetric, required_wait_time_symmetric,
    symmetric_cdf, symmetric_pdf,
};

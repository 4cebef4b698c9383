use serde::Serialize;
use thiserror::Error;

use crate::budget::{Budget, BudgetError};

/// Subset sums at or above `1 − RECOVERY_TOLERANCE` count as a full object.
pub const RECOVERY_TOLERANCE: f64 = 1e-12;

/// Largest node count the subset-enumeration routines accept by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("{name} = {value} is outside its domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("allocation has {n} nodes, above the enumeration limit of {limit}")]
    Capacity { n: usize, limit: usize },
    #[error("allocation stores {total} in total; recovery needs at least 1")]
    Infeasible { total: f64 },
    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

pub type Result<T, E = AnalyticsError> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> AnalyticsError {
    AnalyticsError::Domain { name, value, reason }
}

/// Amount of coded data stored at each of `n ≥ 2` nodes, in units of the
/// original object size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    amounts: Vec<f64>,
    budget: f64,
}

impl Allocation {
    pub fn new(amounts: Vec<f64>, budget: f64) -> Result<Self> {
        if amounts.len() < 2 {
            return Err(AnalyticsError::InvalidAllocation(format!(
                "need at least 2 nodes, got {}",
                amounts.len()
            )));
        }
        if let Some(bad) = amounts.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(AnalyticsError::InvalidAllocation(format!("amount {bad} is not a nonnegative number")));
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(domain("budget", budget, "must be a nonnegative number"));
        }
        let total: f64 = amounts.iter().sum();
        if total > budget + 1e-12 {
            return Err(AnalyticsError::InvalidAllocation(format!(
                "amounts sum to {total}, exceeding the budget {budget}"
            )));
        }
        Ok(Self { amounts, budget })
    }

    /// Allocation whose budget is exactly its total storage.
    pub fn from_amounts(amounts: Vec<f64>) -> Result<Self> {
        let total = amounts.iter().sum();
        Self::new(amounts, total)
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.amounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amounts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.amounts.iter().sum()
    }

    /// Whether the whole allocation holds enough data to recover the object.
    pub fn is_recoverable(&self) -> bool {
        self.total() >= 1.0 - RECOVERY_TOLERANCE
    }

    pub(crate) fn require_recoverable(&self) -> Result<()> {
        if self.is_recoverable() {
            Ok(())
        } else {
            Err(AnalyticsError::Infeasible { total: self.total() })
        }
    }
}

/// `x_s(n, T, m)`: `m` nodes storing `T/m` each, the remaining `n − m` empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetricAllocation {
    n: u64,
    budget: Budget,
    m: u64,
}

impl SymmetricAllocation {
    pub fn new(n: u64, budget: Budget, m: u64) -> Result<Self> {
        if n < 1 {
            return Err(domain("n", n as f64, "must be positive"));
        }
        if budget.cmp_integer(1).is_lt() || budget.cmp_integer(n).is_gt() {
            return Err(domain("T", budget.value(), "must lie in [1, n]"));
        }
        if m < 1 || m > n {
            return Err(domain("m", m as f64, "must lie in [1, n]"));
        }
        Ok(Self { n, budget, m })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// `⌈m/T⌉`, nonempty nodes the collector has to reach.
    pub fn recovery_threshold(&self) -> u64 {
        self.budget.ceil_divide(self.m)
    }

    pub fn share(&self) -> f64 {
        self.budget.value() / self.m as f64
    }

    pub fn expand(&self) -> Result<Allocation> {
        let share = self.share();
        let mut amounts = vec![0.0; self.n.max(2) as usize];
        amounts[..self.m as usize].fill(share);
        Allocation::new(amounts, self.budget.value())
    }
}

/// Pairwise Poisson contact rate `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactModel {
    lambda: f64,
}

impl ContactModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(domain("lambda", lambda, "must be a finite positive rate"));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mean_contact_time(&self) -> f64 {
        1.0 / self.lambda
    }
}

/// `T = a + 1 − 1/ℓ` with `a` a positive integer and `ℓ ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremParams {
    pub a: u64,
    pub ell: f64,
    /// `⌊ℓ⌋`, computed exactly from the rational budget.
    pub ell_floor: u64,
}

impl TheoremParams {
    pub fn reconstruct_budget(&self) -> f64 {
        self.a as f64 + 1.0 - 1.0 / self.ell
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeHint {
    MinimalSpreading,
    MaximalSpreading,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeAssessment {
    pub hint: RegimeHint,
    /// Both sufficient conditions held at once.
    pub thresholds_overlap: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_validation() {
        assert!(Allocation::new(vec![1.0], 1.0).is_err());
        assert!(Allocation::new(vec![1.0, -0.1], 1.0).is_err());
        assert!(Allocation::new(vec![1.0, 0.5], 1.0).is_err());
        assert!(Allocation::new(vec![0.5, 0.5 + 1e-13], 1.0).is_ok());
        assert!(Allocation::new(vec![f64::NAN, 0.5], 1.0).is_err());
        let a = Allocation::from_amounts(vec![1.0 / 3.0; 3]).unwrap();
        assert!(a.is_recoverable());
        assert!(!Allocation::from_amounts(vec![0.4, 0.4]).unwrap().is_recoverable());
    }

    #[test]
    fn symmetric_expansion() {
        let t: Budget = "2.5".parse().unwrap();
        let s = SymmetricAllocation::new(6, t, 4).unwrap();
        assert_eq!(s.expand().unwrap().amounts(), &[0.625, 0.625, 0.625, 0.625, 0.0, 0.0]);
        assert_eq!(s.recovery_threshold(), 2);
        // m < T is legal: one node stores more than a whole object.
        let s = SymmetricAllocation::new(6, t, 2).unwrap();
        assert_eq!(s.recovery_threshold(), 1);
        assert!(SymmetricAllocation::new(6, t, 7).is_err());
        assert!(SymmetricAllocation::new(2, t, 1).is_err());
        assert!(SymmetricAllocation::new(6, "0.5".parse().unwrap(), 1).is_err());
    }

    #[test]
    fn contact_model_rejects_nonpositive_rates() {
        assert!(ContactModel::new(0.0).is_err());
        assert!(ContactModel::new(-1.0).is_err());
        assert!(ContactModel::new(f64::INFINITY).is_err());
        assert_eq!(ContactModel::new(0.01).unwrap().mean_contact_time(), 100.0);
    }
}

//! Exact evaluation by enumerating every subset of nodes.

use super::model::{AnalyticsError, Allocation, ContactModel, Result, DEFAULT_ENUMERATION_LIMIT, RECOVERY_TOLERANCE};
use crate::numeric::{binomial_coefficient, harmonic_number, CompensatedSum};

/// Enumerates the `2^n` subsets of an allocation's nodes.
#[derive(Debug, Clone, Copy)]
pub struct SubsetEnumerator {
    limit: usize,
}

impl Default for SubsetEnumerator {
    fn default() -> Self {
        Self { limit: DEFAULT_ENUMERATION_LIMIT }
    }
}

impl SubsetEnumerator {
    pub fn new(limit: usize) -> Self {
        Self { limit }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// `S_r` for `r = 0..=n`: how many `r`-subsets store at least one object.
    pub fn recoverable_counts(&self, alloc: &Allocation) -> Result<Vec<u64>> {
        let n = alloc.len();
        if n > self.limit || n >= usize::BITS as usize {
            return Err(AnalyticsError::Capacity { n, limit: self.limit });
        }
        let x = alloc.amounts();
        let mut counts = vec![0u64; n + 1];
        let mut sums = vec![0.0f64; 1usize << n];
        for mask in 1usize..(1 << n) {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + x[low];
            if sums[mask] >= 1.0 - RECOVERY_TOLERANCE {
                counts[mask.count_ones() as usize] += 1;
            }
        }
        Ok(counts)
    }

    pub fn count_recoverable_subsets(&self, alloc: &Allocation, r: usize) -> Result<u64> {
        if r < 1 || r > alloc.len() {
            return Err(super::model::domain("r", r as f64, "subset size must lie in [1, n]"));
        }
        Ok(self.recoverable_counts(alloc)?[r])
    }

    /// `P{D ≤ d}` where each node is reached by the deadline with probability `p`.
    pub fn recovery_probability(&self, alloc: &Allocation, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(super::model::domain("p", p, "must lie in [0, 1]"));
        }
        let counts = self.recoverable_counts(alloc)?;
        let n = alloc.len() as i32;
        let total = counts
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, s)| **s > 0)
            .map(|(r, s)| *s as f64 * p.powi(r as i32) * (1.0 - p).powi(n - r as i32))
            .collect::<CompensatedSum>()
            .total();
        Ok(total.clamp(0.0, 1.0))
    }

    /// `E[D] = (1/λ)(H_n − Σ_{1≤|R|≤n−1} 1{Σ_R x ≥ 1} / ((n−|R|) C(n,|R|)))`.
    pub fn expected_delay(&self, alloc: &Allocation, model: ContactModel) -> Result<f64> {
        alloc.require_recoverable()?;
        let counts = self.recoverable_counts(alloc)?;
        let n = alloc.len() as u64;
        let mut acc = CompensatedSum::new();
        acc.add(harmonic_number(n));
        for r in 1..n {
            let s = counts[r as usize];
            if s > 0 {
                acc.add(-(s as f64) / ((n - r) as f64 * binomial_coefficient(n, r)));
            }
        }
        Ok(acc.total() / model.lambda())
    }
}

pub fn recovery_probability_exact(alloc: &Allocation, p: f64) -> Result<f64> {
    SubsetEnumerator::default().recovery_probability(alloc, p)
}

pub fn expected_delay_exact(alloc: &Allocation, model: ContactModel) -> Result<f64> {
    SubsetEnumerator::default().expected_delay(alloc, model)
}

pub fn count_recoverable_subsets(alloc: &Allocation, r: usize) -> Result<u64> {
    SubsetEnumerator::default().count_recoverable_subsets(alloc, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn alloc(x: &[f64]) -> Allocation {
        Allocation::from_amounts(x.to_vec()).unwrap()
    }

    /// Brute force straight from the subset-sum definition, no shared code.
    fn brute_probability(x: &[f64], p: f64) -> f64 {
        let n = x.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let sum: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).sum();
            let size = mask.count_ones() as i32;
            if sum >= 1.0 - 1e-12 {
                total += p.powi(size) * (1.0 - p).powi(n as i32 - size);
            }
        }
        total
    }

    #[test]
    fn recovery_probability_examples() {
        assert_abs_diff_eq!(recovery_probability_exact(&alloc(&[1.0, 1.0, 0.0]), 0.5).unwrap(), 0.75, epsilon = 1e-15);
        for p in [0.0, 0.3, 1.0] {
            assert_eq!(recovery_probability_exact(&alloc(&[0.4, 0.4]), p).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(recovery_probability_exact(&alloc(&[0.5, 0.5, 0.5]), 0.5).unwrap(), 0.5, epsilon = 1e-15);
        let x = [0.3, 0.7, 0.2, 0.5, 0.1];
        for p in [0.1, 0.45, 0.9] {
            assert_abs_diff_eq!(recovery_probability_exact(&alloc(&x), p).unwrap(), brute_probability(&x, p), epsilon = 1e-14);
        }
        assert!(recovery_probability_exact(&alloc(&x), 1.5).is_err());
    }

    #[test]
    fn expected_delay_examples() {
        let one = ContactModel::new(1.0).unwrap();
        // H_3 − (2·1/6 + 3·1/3)
        assert_abs_diff_eq!(expected_delay_exact(&alloc(&[1.0, 1.0, 0.0]), one).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_delay_exact(&alloc(&[1.0, 0.0]), one).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_delay_exact(&alloc(&[0.5, 0.5]), one).unwrap(), 1.5, epsilon = 1e-15);
        let slow = ContactModel::new(0.01).unwrap();
        assert_abs_diff_eq!(expected_delay_exact(&alloc(&[0.5, 0.5]), slow).unwrap(), 150.0, epsilon = 1e-12);
    }

    #[test]
    fn expected_delay_rejects_infeasible() {
        let one = ContactModel::new(1.0).unwrap();
        assert!(matches!(
            expected_delay_exact(&alloc(&[0.4, 0.4]), one),
            Err(AnalyticsError::Infeasible { .. })
        ));
    }

    #[test]
    fn thirds_recover_with_three_nodes() {
        let x = alloc(&[1.0 / 3.0; 3]);
        assert_eq!(count_recoverable_subsets(&x, 3).unwrap(), 1);
        assert_eq!(count_recoverable_subsets(&x, 2).unwrap(), 0);
    }

    #[test]
    fn subset_counts() {
        let x = alloc(&[1.0, 1.0, 0.0]);
        assert_eq!(count_recoverable_subsets(&x, 1).unwrap(), 2);
        assert_eq!(count_recoverable_subsets(&x, 2).unwrap(), 3);
        let zeros = Allocation::new(vec![0.0; 5], 2.0).unwrap();
        for r in 1..=5 {
            assert_eq!(count_recoverable_subsets(&zeros, r).unwrap(), 0);
        }
        assert!(count_recoverable_subsets(&x, 0).is_err());
        assert!(count_recoverable_subsets(&x, 4).is_err());
    }

    #[test]
    fn enumeration_limit_is_enforced() {
        let big = Allocation::from_amounts(vec![0.1; 21]).unwrap();
        let err = expected_delay_exact(&big, ContactModel::new(1.0).unwrap()).unwrap_err();
        assert_eq!(err, AnalyticsError::Capacity { n: 21, limit: 20 });
        assert!(err.to_string().contains("20"));
        assert!(SubsetEnumerator::new(21).recoverable_counts(&big).is_ok());
    }
}

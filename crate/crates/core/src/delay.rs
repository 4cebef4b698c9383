//! Empirical recovery-delay distributions.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("target recovery probability {0} must lie in (0, 1]")]
    BadTarget(f64),
    #[error("target {target} is unattainable: the ECDF never exceeds {max_ecdf} ({censored} of {trials} trials censored)")]
    Unattainable {
        target: f64,
        max_ecdf: f64,
        censored: usize,
        trials: usize,
    },
}

/// Recovery delays from repeated trials. Censored trials never recovered
/// within the horizon and count as "not yet recovered" at every finite delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelayDistribution {
    samples: Vec<f64>,
    censored_count: usize,
}

impl DelayDistribution {
    pub fn new(samples: Vec<f64>, censored_count: usize) -> Self {
        Self { samples, censored_count }
    }

    /// Builds a distribution from per-trial outcomes, `None` meaning censored.
    pub fn from_outcomes<I: IntoIterator<Item = Option<f64>>>(outcomes: I) -> Self {
        let mut samples = Vec::new();
        let mut censored_count = 0;
        for outcome in outcomes {
            match outcome {
                Some(d) => samples.push(d),
                None => censored_count += 1,
            }
        }
        Self { samples, censored_count }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn censored_count(&self) -> usize {
        self.censored_count
    }

    pub fn trials(&self) -> usize {
        self.samples.len() + self.censored_count
    }

    pub fn sorted_samples(&self) -> Vec<f64> {
        let mut s = self.samples.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// Mean of the recovered trials.
    pub fn mean(&self) -> Option<f64> {
        if self.samples.is_empty() {
            return None;
        }
        let sum: CompensatedSum = self.samples.iter().copied().collect();
        Some(sum.total() / self.samples.len() as f64)
    }

    /// Sample standard deviation of the recovered trials.
    pub fn std_dev(&self) -> Option<f64> {
        let n = self.samples.len();
        if n < 2 {
            return None;
        }
        let mean = self.mean()?;
        let ss: CompensatedSum = self.samples.iter().map(|x| (x - mean) * (x - mean)).collect();
        Some((ss.total() / (n - 1) as f64).sqrt())
    }

    pub fn stderr(&self) -> Option<f64> {
        Some(self.std_dev()? / (self.samples.len() as f64).sqrt())
    }

    /// `P̂{D ≤ d}` over all trials, censored included in the denominator.
    pub fn ecdf(&self, d: f64) -> f64 {
        if self.trials() == 0 {
            return 0.0;
        }
        self.samples.iter().filter(|x| **x <= d).count() as f64 / self.trials() as f64
    }

    pub fn max_ecdf(&self) -> f64 {
        if self.trials() == 0 {
            return 0.0;
        }
        self.samples.len() as f64 / self.trials() as f64
    }

    /// Distinct sample values with the ECDF just after each.
    pub fn ecdf_knots(&self) -> Vec<(f64, f64)> {
        let sorted = self.sorted_samples();
        let total = self.trials() as f64;
        let mut knots: Vec<(f64, f64)> = Vec::new();
        for (i, x) in sorted.iter().enumerate() {
            let level = (i + 1) as f64 / total;
            match knots.last_mut() {
                Some(last) if last.0 == *x => last.1 = level,
                _ => knots.push((*x, level)),
            }
        }
        knots
    }

    /// `d(P*)`: the smallest sample `d` with `ECDF(d) ≥ P*`.
    pub fn wait_time(&self, target: f64) -> Result<f64, DistributionError> {
        if !(target > 0.0 && target <= 1.0) {
            return Err(DistributionError::BadTarget(target));
        }
        let total = self.trials() as f64;
        let sorted = self.sorted_samples();
        sorted
            .iter()
            .enumerate()
            .find(|(i, _)| (*i + 1) as f64 / total >= target - 1e-12)
            .map(|(_, d)| *d)
            .ok_or(DistributionError::Unattainable {
                target,
                max_ecdf: self.max_ecdf(),
                censored: self.censored_count,
                trials: self.trials(),
            })
    }

    /// Kolmogorov–Smirnov distance `sup_d |ECDF(d) − F(d)|`.
    pub fn ks_statistic<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let mut before = 0.0;
        let mut worst: f64 = 0.0;
        for (x, after) in self.ecdf_knots() {
            let f = cdf(x);
            worst = worst.max((f - before).abs()).max((after - f).abs());
            before = after;
        }
        // censored mass: the ECDF stays below 1 while F → 1
        if self.censored_count > 0 {
            worst = worst.max(1.0 - before);
        }
        worst
    }
}

/// Critical value of the one-sample KS statistic at the 1% level.
pub fn ks_critical_value_1pct(trials: usize) -> f64 {
    1.63 / (trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wait_time_examples() {
        let d = DelayDistribution::new(vec![4.0, 1.0, 3.0, 2.0], 0);
        assert_eq!(d.wait_time(0.5).unwrap(), 2.0);
        assert_eq!(d.wait_time(1.0).unwrap(), 4.0);
        assert_eq!(d.wait_time(0.26).unwrap(), 2.0);
        assert_eq!(d.wait_time(0.25).unwrap(), 1.0);
        let d = DelayDistribution::new(vec![1.0, 2.0], 2);
        match d.wait_time(0.9) {
            Err(DistributionError::Unattainable { max_ecdf, .. }) => assert_eq!(max_ecdf, 0.5),
            other => panic!("{other:?}"),
        }
        assert!(d.wait_time(0.0).is_err());
    }

    #[test]
    fn ecdf_and_summary() {
        let d = DelayDistribution::from_outcomes([Some(1.0), None, Some(3.0), Some(1.0)]);
        assert_eq!(d.trials(), 4);
        assert_eq!(d.censored_count(), 1);
        assert_eq!(d.ecdf(1.0), 0.5);
        assert_eq!(d.ecdf(0.5), 0.0);
        assert_eq!(d.ecdf_knots(), vec![(1.0, 0.5), (3.0, 0.75)]);
        assert_eq!(d.mean(), Some(5.0 / 3.0));
        assert!(DelayDistribution::new(vec![], 3).mean().is_none());
    }

    #[test]
    fn ks_of_perfect_uniform_grid() {
        let n = 100;
        let d = DelayDistribution::new((1..=n).map(|i| i as f64 / n as f64).collect(), 0);
        let ks = d.ks_statistic(|x| x.clamp(0.0, 1.0));
        assert!((ks - 0.01).abs() < 1e-12);
    }
}

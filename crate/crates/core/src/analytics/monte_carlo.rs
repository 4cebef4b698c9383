//! Sampling oracle for the ideal Poisson-contact model.
//!
//! Each trial draws the first-contact times `W_1..W_n ~ Exponential(λ)`,
//! visits nodes in contact order and stops once the accessed amounts reach
//! one full object.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::model::{domain, Allocation, ContactModel, Result, RECOVERY_TOLERANCE};
use crate::delay::DelayDistribution;

pub fn monte_carlo_delay(alloc: &Allocation, model: ContactModel, trials: usize, seed: u64) -> Result<DelayDistribution> {
    alloc.require_recoverable()?;
    if trials == 0 {
        return Err(domain("trials", 0.0, "need at least one trial"));
    }
    let exp = Exp::new(model.lambda()).map_err(|_| domain("lambda", model.lambda(), "invalid rate"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amounts = alloc.amounts();
    let mut contacts: Vec<(f64, f64)> = Vec::with_capacity(amounts.len());
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        contacts.clear();
        contacts.extend(amounts.iter().map(|x| (exp.sample(&mut rng), *x)));
        contacts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut accessed = 0.0;
        let mut delay = f64::INFINITY;
        for (w, x) in &contacts {
            accessed += x;
            if accessed >= 1.0 - RECOVERY_TOLERANCE {
                delay = *w;
                break;
            }
        }
        samples.push(delay);
    }
    Ok(DelayDistribution::new(samples, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_exponential_mean() {
        let x = Allocation::from_amounts(vec![1.0, 0.0]).unwrap();
        let d = monte_carlo_delay(&x, ContactModel::new(1.0).unwrap(), 100_000, 11).unwrap();
        let mean = d.mean().unwrap();
        assert!((mean - 1.0).abs() < 4.0 / (1e5f64).sqrt(), "{mean}");
    }

    #[test]
    fn max_of_two_exponentials() {
        let x = Allocation::from_amounts(vec![0.5, 0.5]).unwrap();
        let d = monte_carlo_delay(&x, ContactModel::new(1.0).unwrap(), 100_000, 5).unwrap();
        let (mean, se) = (d.mean().unwrap(), d.stderr().unwrap());
        assert!((mean - 1.5).abs() < 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn seeded_runs_repeat() {
        let x = Allocation::from_amounts(vec![0.3, 0.3, 0.4, 0.2]).unwrap();
        let m = ContactModel::new(0.1).unwrap();
        assert_eq!(monte_carlo_delay(&x, m, 500, 3).unwrap(), monte_carlo_delay(&x, m, 500, 3).unwrap());
        assert_ne!(monte_carlo_delay(&x, m, 500, 3).unwrap(), monte_carlo_delay(&x, m, 500, 4).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ContactModel::new(1.0).unwrap();
        let empty = Allocation::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!(monte_carlo_delay(&empty, m, 10, 0).is_err());
        let ok = Allocation::from_amounts(vec![1.0, 0.0]).unwrap();
        assert!(monte_carlo_delay(&ok, m, 0, 0).is_err());
    }
}

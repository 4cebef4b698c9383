//! Closed forms for symmetric allocations `x_s(n, T, m)`.
//!
//! With `k = ⌈m/T⌉`, recovery happens exactly when the collector has met `k`
//! of the `m` nonempty nodes, so `D` is the `k`-th order statistic of `m`
//! i.i.d. `Exponential(λ)` first-contact times.

use super::model::{domain, ContactModel, Result, SymmetricAllocation};
use crate::budget::Budget;
use crate::numeric::{binomial_coefficient, binomial_upper_tail, harmonic_window};

/// `p_{λ,d} = 1 − e^{−λd}`, the chance a given node has been met by time `d`.
pub fn contact_probability(model: ContactModel, d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(domain("d", d, "deadline must be nonnegative"));
    }
    Ok(-(-model.lambda() * d).exp_m1())
}

/// `P{Binomial(m, p) ≥ ⌈m/T⌉}`.
pub fn recovery_probability_symmetric(sym: &SymmetricAllocation, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "must lie in [0, 1]"));
    }
    Ok(binomial_upper_tail(sym.m(), p, sym.recovery_threshold()))
}

fn threshold(budget: Budget, m: u64) -> Result<u64> {
    if budget.cmp_integer(1).is_lt() {
        return Err(domain("T", budget.value(), "budget must be at least 1"));
    }
    if m == 0 {
        return Err(domain("m", 0.0, "need at least one nonempty node"));
    }
    Ok(budget.ceil_divide(m))
}

/// `E_D(λ, T, m) = (1/λ) Σ_{i=1}^{k} 1/(m − k + i)` with `k = ⌈m/T⌉`.
pub fn expected_delay_symmetric(model: ContactModel, budget: Budget, m: u64) -> Result<f64> {
    let k = threshold(budget, m)?;
    Ok(harmonic_window(m - k, k) / model.lambda())
}

/// `F_D(t)` for `x_s(·, T, m)`.
pub fn symmetric_cdf(t: f64, model: ContactModel, budget: Budget, m: u64) -> Result<f64> {
    let k = threshold(budget, m)?;
    let p = contact_probability(model, t)?;
    Ok(binomial_upper_tail(m, p, k))
}

/// `f_D(t) = C(m,k) k F_W(t)^{k−1} (1 − F_W(t))^{m−k} f_W(t)`.
pub fn symmetric_pdf(t: f64, model: ContactModel, budget: Budget, m: u64) -> Result<f64> {
    let k = threshold(budget, m)?;
    let p = contact_probability(model, t)?;
    let lambda = model.lambda();
    // (1 − F_W)^{m−k} f_W = λ e^{−λt (m−k+1)}
    let survival = (-lambda * t * (m - k + 1) as f64).exp();
    let coefficient = binomial_coefficient(m, k) * k as f64;
    if coefficient.is_finite() {
        Ok(coefficient * p.powi(k as i32 - 1) * survival * lambda)
    } else {
        let ln = crate::numeric::ln_binomial(m, k) + (k as f64).ln() + (k - 1) as f64 * p.ln()
            - lambda * t * (m - k + 1) as f64
            + lambda.ln();
        Ok(ln.exp())
    }
}

/// `d(P*) = min{d : P{D ≤ d} ≥ P*}` by bisection on the symmetric CDF.
pub fn required_wait_time_symmetric(model: ContactModel, budget: Budget, m: u64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain("target", target, "recovery probability target must lie in (0, 1)"));
    }
    threshold(budget, m)?;
    let tolerance = 1e-9 / model.lambda();
    let cdf = |d: f64| symmetric_cdf(d, model, budget, m);
    let mut lo = 0.0;
    let mut hi = model.mean_contact_time();
    while cdf(hi)? < target {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if cdf(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

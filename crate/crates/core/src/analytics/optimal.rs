//! Choosing the number of nonempty nodes `m` for a symmetric allocation.

use serde::Serialize;

use super::model::{domain, ContactModel, RegimeAssessment, RegimeHint, Result, SymmetricAllocation, TheoremParams};
use super::symmetric::{expected_delay_symmetric, recovery_probability_symmetric};
use crate::budget::Budget;
use crate::numeric::{harmonic_number, CompensatedSum};

fn check_budget(n: u64, budget: Budget) -> Result<()> {
    if n < 1 {
        return Err(domain("n", n as f64, "must be positive"));
    }
    if budget.cmp_integer(1).is_lt() || budget.cmp_integer(n).is_gt() {
        return Err(domain("T", budget.value(), "budget must lie in [1, n]"));
    }
    Ok(())
}

/// `{⌊T⌋, ⌊2T⌋, …, ⌊⌊n/T⌋T⌋, n}`: the largest `m` inside each interval on
/// which `⌈m/T⌉` is constant, ascending and deduplicated.
pub fn candidate_ms(n: u64, budget: Budget) -> Result<Vec<u64>> {
    check_budget(n, budget)?;
    let mut out: Vec<u64> = (1..=budget.floor_divide(n)).map(|k| budget.floor_times(k)).collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    Ok(out)
}

/// Writes `T = a + 1 − 1/ℓ`.
pub fn theorem_params(budget: Budget) -> Result<TheoremParams> {
    if budget.cmp_integer(1).is_lt() {
        return Err(domain("T", budget.value(), "budget must be at least 1"));
    }
    if budget.is_integer() {
        return Ok(TheoremParams { a: budget.floor(), ell: 1.0, ell_floor: 1 });
    }
    // ℓ = 1/(⌈T⌉ − T) = den / (⌈T⌉·den − num)
    let den = budget.denominator() as u128;
    let gap = budget.ceil() as u128 * den - budget.numerator() as u128;
    Ok(TheoremParams {
        a: budget.ceil() - 1,
        ell: den as f64 / gap as f64,
        ell_floor: (den / gap) as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalSymmetric {
    pub m: u64,
    pub expected_delay: f64,
    pub params: TheoremParams,
}

/// The `m*` minimizing `E_D(λ, T, m)` over `m ∈ {1..n}`.
///
/// When `⌊ℓ⌋ ≤ ⌊n/T⌋` this is `⌊⌊ℓ⌋T⌋`. Otherwise only `⌊⌊n/T⌋T⌋` and `n`
/// remain; both are evaluated and a tie goes to the smaller `m`.
pub fn optimal_symmetric_m(n: u64, model: ContactModel, budget: Budget) -> Result<OptimalSymmetric> {
    check_budget(n, budget)?;
    let params = theorem_params(budget)?;
    let groups = budget.floor_divide(n);
    let m = if params.ell_floor <= groups {
        budget.floor_times(params.ell_floor)
    } else {
        let last = budget.floor_times(groups);
        if last == n {
            n
        } else {
            let d_last = expected_delay_symmetric(model, budget, last)?;
            let d_all = expected_delay_symmetric(model, budget, n)?;
            if d_all < d_last && (d_last - d_all) > 1e-12 * d_last {
                n
            } else {
                last
            }
        }
    };
    Ok(OptimalSymmetric {
        m,
        expected_delay: expected_delay_symmetric(model, budget, m)?,
        params,
    })
}

/// `(1/λ)(H_n − Σ_{r=1}^{n−1} min(rT/n, 1)/(n − r))`, a lower bound on the
/// expected delay of any allocation of budget `T`.
pub fn expected_delay_lower_bound(n: u64, model: ContactModel, budget: Budget) -> Result<f64> {
    check_budget(n, budget)?;
    let mut acc = CompensatedSum::new();
    acc.add(harmonic_number(n));
    let t = budget.value();
    for r in 1..n {
        // rT ≥ n decided exactly
        let saturated = r as u128 * budget.numerator() as u128 >= n as u128 * budget.denominator() as u128;
        let share = if saturated { 1.0 } else { r as f64 * t / n as f64 };
        acc.add(-share / (n - r) as f64);
    }
    Ok(acc.total() / model.lambda())
}

/// Sufficient conditions for minimal (`p ≤ 1/⌈T⌉`) or maximal
/// (`p ≥ 4/(3⌊T⌋)`) spreading to be the best symmetric allocation for the
/// recovery probability.
pub fn regime_hint(p: f64, budget: Budget) -> Result<RegimeAssessment> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("p", p, "must lie in [0, 1]"));
    }
    if budget.cmp_integer(1).is_lt() {
        return Err(domain("T", budget.value(), "budget must be at least 1"));
    }
    let minimal = p <= 1.0 / budget.ceil() as f64;
    let maximal = p >= 4.0 / (3.0 * budget.floor() as f64);
    let hint = if minimal {
        RegimeHint::MinimalSpreading
    } else if maximal {
        RegimeHint::MaximalSpreading
    } else {
        RegimeHint::Indeterminate
    };
    Ok(RegimeAssessment { hint, thresholds_overlap: minimal && maximal })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateProbability {
    pub m: u64,
    pub recovery_probability: f64,
}

/// Recovery probabilities of the minimal-spreading allocation `m = ⌊T⌋`
/// and of both maximal-spreading candidates `⌊⌊n/T⌋T⌋` and `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadingComparison {
    pub minimal: CandidateProbability,
    pub maximal: Vec<CandidateProbability>,
}

pub fn spreading_comparison(n: u64, budget: Budget, p: f64) -> Result<SpreadingComparison> {
    check_budget(n, budget)?;
    let eval = |m: u64| -> Result<CandidateProbability> {
        let sym = SymmetricAllocation::new(n, budget, m)?;
        Ok(CandidateProbability { m, recovery_probability: recovery_probability_symmetric(&sym, p)? })
    };
    let mut maximal_ms = vec![budget.floor_times(budget.floor_divide(n)), n];
    maximal_ms.dedup();
    Ok(SpreadingComparison {
        minimal: eval(budget.floor())?,
        maximal: maximal_ms.into_iter().map(eval).collect::<Result<_>>()?,
    })
}

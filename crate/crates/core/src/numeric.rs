//! Harmonic numbers, binomial tails and compensated summation.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// `H_k = Σ_{i=1}^{k} 1/i`, with `H_0 = 0`.
pub fn harmonic_number(k: u64) -> f64 {
    harmonic_window(0, k)
}

/// `Σ_{i=1}^{len} 1/(start + i) = H_{start+len} − H_start`, summed directly
/// from the smallest term so that no cancellation occurs.
pub fn harmonic_window(start: u64, len: u64) -> f64 {
    (1..=len)
        .rev()
        .map(|i| 1.0 / (start + i) as f64)
        .collect::<CompensatedSum>()
        .total()
}

/// Table of `H_0 ..= H_{k_max}`.
pub fn harmonic_prefix(k_max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for i in 1..=k_max {
        acc.add(1.0 / i as f64);
        out.push(acc.total());
    }
    out
}

/// `ln(n + 1/2) + γ + 1/(24 (n+1)^2)`, a strict lower bound on `H_n` for `n ≥ 1`.
pub fn harmonic_lower_bound(n: u64) -> f64 {
    let n = n as f64;
    (n + 0.5).ln() + EULER_GAMMA + 1.0 / (24.0 * (n + 1.0) * (n + 1.0))
}

/// `ln(n + 1/2) + γ + 1/(24 n^2)`, a strict upper bound on `H_n` for `n ≥ 1`.
pub fn harmonic_upper_bound(n: u64) -> f64 {
    let n = n as f64;
    (n + 0.5).ln() + EULER_GAMMA + 1.0 / (24.0 * n * n)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|i| ((n - k + i) as f64 / i as f64).ln())
        .collect::<CompensatedSum>()
        .total()
}

/// `C(n, k)` as a float. Exact while the result fits in 53 bits.
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 1..=k {
        c = c * (n - k + i) as f64 / i as f64;
    }
    // The recurrence is exact in real arithmetic; snap small results back
    // onto the integers they must be.
    if c < 9.0e15 {
        c.round()
    } else {
        c
    }
}

/// `P{Binomial(trials, p) ≥ threshold}`.
pub fn binomial_upper_tail(trials: u64, p: f64, threshold: u64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if threshold == 0 {
        return 1.0;
    }
    if threshold > trials || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut acc = CompensatedSum::new();
    for r in threshold..=trials {
        let ln_term = ln_binomial(trials, r) + r as f64 * ln_p + (trials - r) as f64 * ln_q;
        acc.add(ln_term.exp());
    }
    acc.total().clamp(0.0, 1.0)
}

/// Binomial probability mass `P{Binomial(trials, p) = r}`.
pub fn binomial_pmf(trials: u64, p: f64, r: u64) -> f64 {
    if r > trials {
        return 0.0;
    }
    if p <= 0.0 {
        return if r == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if r == trials { 1.0 } else { 0.0 };
    }
    (ln_binomial(trials, r) + r as f64 * p.ln() + (trials - r) as f64 * (-p).ln_1p()).exp()
}

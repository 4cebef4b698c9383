//! Exact rational storage budgets.
//!
//! Every floor/ceiling taken on a budget (`⌊kT⌋`, `⌈m/T⌉`, `⌊n/T⌋`) is
//! computed in integer arithmetic so that decimal inputs such as `1.95`
//! never land on the wrong side of an integer boundary.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// Resolution used when a budget is built from an `f64`.
pub const F64_RESOLUTION: u64 = 1_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("budget must be a finite positive number, got {0}")]
    NotPositive(String),
    #[error("cannot parse budget {input:?}: {reason}")]
    Parse { input: String, reason: &'static str },
    #[error("budget {0} is out of the representable range")]
    Overflow(String),
}

/// A positive storage budget `T`, held as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Budget {
    pub fn from_ratio(num: u64, den: u64) -> Result<Self, BudgetError> {
        if num == 0 || den == 0 {
            return Err(BudgetError::NotPositive(format!("{num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn from_integer(value: u64) -> Result<Self, BudgetError> {
        Self::from_ratio(value, 1)
    }

    /// Snaps `value` to the nearest multiple of `1 / F64_RESOLUTION`, so a
    /// value within 1e-9 of an integer is treated as that integer.
    pub fn from_f64(value: f64) -> Result<Self, BudgetError> {
        if !value.is_finite() || value <= 0.0 {
            return Err(BudgetError::NotPositive(value.to_string()));
        }
        let scaled = (value * F64_RESOLUTION as f64).round();
        if scaled >= u64::MAX as f64 {
            return Err(BudgetError::Overflow(value.to_string()));
        }
        Self::from_ratio(scaled as u64, F64_RESOLUTION)
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    /// `⌊T⌋`
    pub fn floor(&self) -> u64 {
        self.num / self.den
    }

    /// `⌈T⌉`
    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    /// `⌊kT⌋`
    pub fn floor_times(&self, k: u64) -> u64 {
        (k as u128 * self.num as u128 / self.den as u128) as u64
    }

    /// `⌊n/T⌋`
    pub fn floor_divide(&self, n: u64) -> u64 {
        (n as u128 * self.den as u128 / self.num as u128) as u64
    }

    /// `⌈m/T⌉`, the number of nonempty nodes of `x_s(n, T, m)` needed to recover.
    pub fn ceil_divide(&self, m: u64) -> u64 {
        (m as u128 * self.den as u128).div_ceil(self.num as u128) as u64
    }

    /// True when `k · T` is an integer.
    pub fn times_is_integer(&self, k: u64) -> bool {
        (k as u128 * self.num as u128).is_multiple_of(self.den as u128)
    }

    pub fn checked_add(&self, other: &Budget) -> Option<Budget> {
        let den = (self.den as u128).checked_mul(other.den as u128 / gcd(self.den, other.den) as u128)?;
        let num = self.num as u128 * (den / self.den as u128) + other.num as u128 * (den / other.den as u128);
        let g = gcd_u128(num, den);
        let (num, den) = (num / g, den / g);
        Some(Budget {
            num: u64::try_from(num).ok()?,
            den: u64::try_from(den).ok()?,
        })
    }

    /// Compares against an integer without rounding.
    pub fn cmp_integer(&self, value: u64) -> Ordering {
        (self.num as u128).cmp(&(value as u128 * self.den as u128))
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl PartialOrd for Budget {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Budget {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl FromStr for Budget {
    type Err = BudgetError;

    /// Parses a plain decimal such as `5`, `1.95` or `0.125` exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| BudgetError::Parse { input: s.to_string(), reason };
        let trimmed = s.trim();
        let (int_part, frac_part) = match trimmed.split_once('.') {
            Some((i, f)) => (i, f),
            None => (trimmed, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err("empty"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(err("expected a plain nonnegative decimal"));
        }
        let frac_part = frac_part.trim_end_matches('0');
        if frac_part.len() > 18 {
            return Err(err("too many decimal places"));
        }
        let den = 10u64.pow(frac_part.len() as u32);
        let int_value: u64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| err("integer part too large"))? };
        let frac_value: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| err("bad fraction"))? };
        let num = int_value
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_value))
            .ok_or_else(|| err("value too large"))?;
        Self::from_ratio(num, den).map_err(|_| err("budget must be positive"))
    }
}

impl TryFrom<f64> for Budget {
    type Error = BudgetError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::from_f64(value)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Terminating decimals print exactly; anything else falls back to f64.
        let mut den = self.den;
        for p in [2u64, 5] {
            while den.is_multiple_of(p) {
                den /= p;
            }
        }
        if den != 1 {
            return write!(f, "{}", self.value());
        }
        let int = self.num / self.den;
        let mut rem = self.num % self.den;
        if rem == 0 {
            return write!(f, "{int}");
        }
        write!(f, "{int}.")?;
        while rem != 0 {
            rem *= 10;
            write!(f, "{}", rem / self.den)?;
            rem %= self.den;
        }
        Ok(())
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

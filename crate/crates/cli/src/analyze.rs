//! `analyze` and `optimize`: analytic delay tables for symmetric allocations.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::Serialize;

use storalloc::analytics::{
    candidate_ms, contact_probability, expected_delay_lower_bound, expected_delay_symmetric, optimal_symmetric_m, recovery_probability_symmetric,
    regime_hint, required_wait_time_symmetric, spreading_comparison, ContactModel, SymmetricAllocation,
};
use storalloc::Budget;

use crate::output::{emit, field, ExperimentSpec, Format};

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Number of storage nodes.
    #[arg(long)]
    pub n: u64,
    /// Contact rate λ.
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value = "1")]
    pub t_min: Budget,
    /// Defaults to n.
    #[arg(long)]
    pub t_max: Option<Budget>,
    #[arg(long, default_value = "0.05")]
    pub t_step: Budget,
    /// Adds a recovery_probability column for this deadline.
    #[arg(long, conflicts_with = "target_prob")]
    pub deadline: Option<f64>,
    /// Adds a wait_time column: the deadline reaching this recovery probability.
    #[arg(long)]
    pub target_prob: Option<f64>,
    /// Extra spreading sizes tabulated alongside the candidates.
    #[arg(long, value_delimiter = ',')]
    pub extra_m: Vec<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct Row {
    #[serde(rename = "T")]
    t: String,
    m: u64,
    expected_delay: f64,
    lower_bound: f64,
    is_theorem_optimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovery_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wait_time: Option<f64>,
}

fn budget_grid(args: &AnalyzeArgs) -> Result<Vec<Budget>> {
    let t_max = match args.t_max {
        Some(t) => t,
        None => Budget::from_integer(args.n)?,
    };
    ensure!(args.t_min.cmp_integer(1).is_ge(), "--t-min {} must be at least 1", args.t_min);
    ensure!(t_max.cmp_integer(args.n).is_le(), "--t-max {} must not exceed n = {}", t_max, args.n);
    ensure!(args.t_min <= t_max, "--t-min {} exceeds --t-max {}", args.t_min, t_max);
    let mut grid = Vec::new();
    let mut t = args.t_min;
    while t <= t_max {
        grid.push(t);
        ensure!(grid.len() <= 1_000_000, "budget grid is too large");
        t = t.checked_add(&args.t_step).context("budget grid overflows")?;
    }
    Ok(grid)
}

fn validate(args: &AnalyzeArgs) -> Result<ContactModel> {
    ensure!(args.n >= 2, "--n must be at least 2");
    let model = ContactModel::new(args.lambda)?;
    if let Some(&m) = args.extra_m.iter().find(|&&m| m == 0 || m > args.n) {
        bail!("--extra-m {m} must lie in 1..={}", args.n);
    }
    if let Some(d) = args.deadline {
        ensure!(d.is_finite() && d >= 0.0, "--deadline must be a non-negative number");
    }
    if let Some(p) = args.target_prob {
        ensure!(p > 0.0 && p < 1.0, "--target-prob must lie in (0, 1)");
    }
    Ok(model)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let model = validate(args)?;
    let grid = budget_grid(args)?;
    let mut rows = Vec::new();
    for budget in grid {
        let best = optimal_symmetric_m(args.n, model, budget)?;
        let bound = expected_delay_lower_bound(args.n, model, budget)?;
        let mut ms = candidate_ms(args.n, budget)?;
        ms.extend(&args.extra_m);
        ms.sort_unstable();
        ms.dedup();
        for m in ms {
            let sym = SymmetricAllocation::new(args.n, budget, m)?;
            let recovery_probability = match args.deadline {
                Some(d) => Some(recovery_probability_symmetric(&sym, contact_probability(model, d)?)?),
                None => None,
            };
            let wait_time = match args.target_prob {
                Some(p) => Some(required_wait_time_symmetric(model, budget, m, p)?),
                None => None,
            };
            rows.push(Row {
                t: budget.to_string(),
                m,
                expected_delay: expected_delay_symmetric(model, budget, m)?,
                lower_bound: bound,
                is_theorem_optimal: m == best.m,
                recovery_probability,
                wait_time,
            });
        }
    }
    let spec = ExperimentSpec::new("analyze", args);
    let bytes = match args.format {
        Format::Json => serde_json::to_vec_pretty(&serde_json::json!({ "spec": spec, "rows": rows }))?,
        Format::Csv => {
            let mut out = spec.csv_comment()?.into_bytes();
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["T", "m", "expected_delay", "lower_bound", "is_theorem_optimal"];
            if args.deadline.is_some() {
                header.push("recovery_probability");
            }
            if args.target_prob.is_some() {
                header.push("wait_time");
            }
            w.write_record(&header)?;
            for r in &rows {
                let mut rec = vec![r.t.clone(), r.m.to_string(), r.expected_delay.to_string(), r.lower_bound.to_string(), r.is_theorem_optimal.to_string()];
                if args.deadline.is_some() {
                    rec.push(field(r.recovery_probability));
                }
                if args.target_prob.is_some() {
                    rec.push(field(r.wait_time));
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
            drop(w);
            out
        }
    };
    emit(args.output.as_deref(), &bytes)
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub lambda: f64,
    /// Storage budget T as a decimal, e.g. 2.5.
    #[arg(long)]
    pub budget: Budget,
    /// Also report both spreading extremes at this per-node contact probability.
    #[arg(long)]
    pub contact_prob: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

pub fn optimize(args: &OptimizeArgs) -> Result<()> {
    ensure!(args.n >= 2, "--n must be at least 2");
    let model = ContactModel::new(args.lambda)?;
    let best = optimal_symmetric_m(args.n, model, args.budget)?;
    let bound = expected_delay_lower_bound(args.n, model, args.budget)?;
    let candidates = candidate_ms(args.n, args.budget)?
        .into_iter()
        .map(|m| Ok((m, expected_delay_symmetric(model, args.budget, m)?)))
        .collect::<Result<Vec<_>>>()?;
    let spreading = match args.contact_prob {
        Some(p) => Some((regime_hint(p, args.budget)?, spreading_comparison(args.n, args.budget, p)?)),
        None => None,
    };
    let spec = ExperimentSpec::new("optimize", args);
    let bytes = match args.format {
        Format::Json => {
            let mut doc = serde_json::json!({
                "spec": spec,
                "m": best.m,
                "expected_delay": best.expected_delay,
                "lower_bound": bound,
                "params": best.params,
                "candidates": candidates.iter().map(|(m, e)| serde_json::json!({ "m": m, "expected_delay": e })).collect::<Vec<_>>(),
            });
            if let Some((hint, comparison)) = &spreading {
                doc["regime"] = serde_json::to_value(hint)?;
                doc["spreading"] = serde_json::to_value(comparison)?;
            }
            let mut v = serde_json::to_vec_pretty(&doc)?;
            v.push(b'\n');
            v
        }
        Format::Csv => {
            let mut out = spec.csv_comment()?.into_bytes();
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["m", "expected_delay", "lower_bound", "is_theorem_optimal"])?;
            for (m, e) in &candidates {
                w.write_record([m.to_string(), e.to_string(), bound.to_string(), (*m == best.m).to_string()])?;
            }
            w.flush()?;
            drop(w);
            out
        }
    };
    emit(None, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(t_min: &str, t_max: &str, step: &str) -> AnalyzeArgs {
        AnalyzeArgs {
            n: 20,
            lambda: 0.01,
            t_min: t_min.parse().unwrap(),
            t_max: Some(t_max.parse().unwrap()),
            t_step: step.parse().unwrap(),
            deadline: None,
            target_prob: None,
            extra_m: vec![],
            output: None,
            format: Format::Csv,
        }
    }

    #[test]
    fn grid_is_exact_and_inclusive() {
        let g = budget_grid(&args("1", "2", "0.1")).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.last().unwrap().to_string(), "2");
        assert_eq!(g[3].to_string(), "1.3");
    }

    #[test]
    fn grid_rejects_bad_bounds() {
        assert!(budget_grid(&args("0.5", "2", "0.1")).is_err());
        assert!(budget_grid(&args("1", "21", "0.1")).is_err());
        assert!(budget_grid(&args("3", "2", "0.1")).is_err());
    }
}

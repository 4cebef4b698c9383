//! `compare`: simulated or ideal-contact delays against the analytic
//! symmetric-allocation distribution.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use storalloc::analytics::{expected_delay_symmetric, monte_carlo_delay, symmetric_cdf, ContactModel, SymmetricAllocation};
use storalloc::delay::ks_critical_value_1pct;
use storalloc::{Budget, DelayDistribution};
use storalloc_sim::read_delay_csv;

use crate::output::{emit, field, ExperimentSpec, Format};

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Output directory of a `simulate` or `replay` run.
    #[arg(long, required_unless_present = "ideal", conflicts_with = "ideal")]
    pub sim_dir: Option<PathBuf>,
    /// Draw ideal-contact samples instead of reading a simulation.
    #[arg(long)]
    pub ideal: bool,
    #[arg(long)]
    pub n: u64,
    /// Contact rate; fitted per cell by matching the sample mean when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Restrict to cells with this budget (required with --ideal).
    #[arg(long)]
    pub budget: Option<Budget>,
    /// Restrict to cells with this w (required with --ideal).
    #[arg(long)]
    pub w: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Serialize)]
pub struct ComparisonRow {
    pub source: String,
    pub n: u64,
    #[serde(rename = "T")]
    pub budget: String,
    pub w: u64,
    pub m: u64,
    pub lambda: f64,
    pub lambda_fitted: bool,
    pub trials: usize,
    pub censored_count: usize,
    pub sample_mean: Option<f64>,
    pub analytic_mean: f64,
    pub mean_gap: Option<f64>,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
}

#[derive(Debug, Deserialize)]
struct SummaryCell {
    n: u64,
    #[serde(rename = "T")]
    budget: String,
    w: u64,
    m: u64,
    file: String,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Debug, Deserialize)]
struct Summary {
    cells: Vec<SummaryCell>,
}

#[derive(Debug, Deserialize)]
struct JsonOutcome {
    delay: Option<f64>,
    censored: bool,
}

#[derive(Debug, Deserialize)]
struct JsonCell {
    outcomes: Vec<JsonOutcome>,
}

/// Compares `dist` against the symmetric allocation of `m` packets worth
/// `T/m` each. Without a rate the one matching the sample mean is used.
pub fn compare_distribution(source: String, dist: &DelayDistribution, n: u64, budget: Budget, w: u64, m: u64, lambda: Option<f64>) -> Result<ComparisonRow> {
    SymmetricAllocation::new(n, budget, m)?;
    let unit = ContactModel::new(1.0)?;
    let (lambda, fitted) = match (lambda, dist.mean()) {
        (Some(l), _) => (l, false),
        (None, Some(mean)) if mean > 0.0 => (expected_delay_symmetric(unit, budget, m)? / mean, true),
        (None, _) => bail!("{source}: cannot fit a rate without positive recovered delays; pass --lambda"),
    };
    let model = ContactModel::new(lambda)?;
    let analytic_mean = expected_delay_symmetric(model, budget, m)?;
    let ks_statistic = dist.ks_statistic(|t| symmetric_cdf(t, model, budget, m).expect("validated allocation"));
    Ok(ComparisonRow {
        source,
        n,
        budget: budget.to_string(),
        w,
        m,
        lambda,
        lambda_fitted: fitted,
        trials: dist.trials(),
        censored_count: dist.censored_count(),
        sample_mean: dist.mean(),
        analytic_mean,
        mean_gap: dist.mean().map(|s| s - analytic_mean),
        ks_statistic,
        ks_critical_1pct: ks_critical_value_1pct(dist.trials()),
    })
}

fn load_cell(path: &std::path::Path) -> Result<DelayDistribution> {
    let text = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let cell: JsonCell = serde_json::from_slice(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(DelayDistribution::from_outcomes(cell.outcomes.into_iter().map(|o| if o.censored { None } else { o.delay })))
    } else {
        Ok(read_delay_csv(text.as_slice()).with_context(|| format!("parsing {}", path.display()))?)
    }
}

fn compare_sim_dir(args: &CompareArgs, dir: &std::path::Path) -> Result<Vec<ComparisonRow>> {
    let summary_path = dir.join("summary.json");
    let summary: Summary = serde_json::from_slice(&fs::read(&summary_path).with_context(|| format!("reading {}", summary_path.display()))?)
        .with_context(|| format!("parsing {}", summary_path.display()))?;
    let mut rows = Vec::new();
    for cell in summary.cells.iter().filter(|c| c.error.is_none()) {
        ensure!(cell.n == args.n, "{}: simulated with n = {}, but --n is {}", cell.file, cell.n, args.n);
        let budget: Budget = cell.budget.parse()?;
        if args.budget.is_some_and(|b| b != budget) || args.w.is_some_and(|w| w != cell.w) {
            continue;
        }
        let dist = load_cell(&dir.join(&cell.file))?;
        rows.push(compare_distribution(cell.file.clone(), &dist, args.n, budget, cell.w, cell.m, args.lambda)?);
    }
    if rows.is_empty() {
        bail!(
            "no completed cell in {} matches n = {}{}{}",
            dir.display(),
            args.n,
            args.budget.map(|b| format!(", T = {b}")).unwrap_or_default(),
            args.w.map(|w| format!(", w = {w}")).unwrap_or_default()
        );
    }
    Ok(rows)
}

fn compare_ideal(args: &CompareArgs) -> Result<ComparisonRow> {
    let (Some(budget), Some(w), Some(lambda)) = (args.budget, args.w, args.lambda) else {
        bail!("--ideal needs --budget, --w and --lambda");
    };
    let m = (w as f64 * budget.value()).round() as u64;
    ensure!(budget.times_is_integer(w), "w·T = {w}·{budget} is not an integer");
    let alloc = SymmetricAllocation::new(args.n, budget, m)?.expand()?;
    let dist = monte_carlo_delay(&alloc, ContactModel::new(lambda)?, args.trials, args.seed)?;
    compare_distribution("ideal-contact".into(), &dist, args.n, budget, w, m, Some(lambda))
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let rows = match &args.sim_dir {
        Some(dir) => compare_sim_dir(args, dir)?,
        None => vec![compare_ideal(args)?],
    };
    let spec = ExperimentSpec::new("compare", args);
    let bytes = match args.format {
        Format::Json => serde_json::to_vec_pretty(&serde_json::json!({ "spec": spec, "rows": rows }))?,
        Format::Csv => {
            let mut out = spec.csv_comment()?.into_bytes();
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "source", "n", "T", "w", "m", "lambda", "lambda_fitted", "trials", "censored_count", "sample_mean", "analytic_mean", "mean_gap",
                "ks_statistic", "ks_critical_1pct",
            ])?;
            for r in &rows {
                w.write_record([
                    r.source.clone(),
                    r.n.to_string(),
                    r.budget.clone(),
                    r.w.to_string(),
                    r.m.to_string(),
                    r.lambda.to_string(),
                    r.lambda_fitted.to_string(),
                    r.trials.to_string(),
                    r.censored_count.to_string(),
                    field(r.sample_mean),
                    r.analytic_mean.to_string(),
                    field(r.mean_gap),
                    r.ks_statistic.to_string(),
                    r.ks_critical_1pct.to_string(),
                ])?;
            }
            w.flush()?;
            drop(w);
            out
        }
    };
    emit(args.output.as_deref(), &bytes)
}

//! `simulate`, `replay` and `synth-trace`: sweeps over experiment cells.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use storalloc::protocol::ProtocolParams;
use storalloc::Budget;
use storalloc_sim::traces::{synthetic_trace, SyntheticTraceSpec};
use storalloc_sim::{
    default_max_steps, parse_trace, replay_experiment, run_experiment, write_delay_csv, CellSummary, CoordinateMode, ExperimentResult,
    Scenario, SimConfig, TraceDataset, TraceReplayConfig,
};

use crate::output::{write_atomic, ExperimentSpec, Format};

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_value = "baseline")]
    pub scenario: Vec<Scenario>,
    /// Storage budgets T, as decimals.
    #[arg(long, value_delimiter = ',', required = true)]
    pub budget: Vec<Budget>,
    /// Packets per unit budget; every legal value when omitted.
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps of dissemination before the collector starts reading.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub recovery_start: Vec<u64>,
    /// Censoring horizon; defaults to max(50·recovery_start, 100000).
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub nodes: usize,
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
    pub targets: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value = "planar")]
    pub mode: CoordinateMode,
    /// Communication range in meters.
    #[arg(long, default_value_t = 20.0)]
    pub range: f64,
    /// Seconds between steps.
    #[arg(long, default_value_t = 60.0)]
    pub time_step: f64,
    /// Timestamp (seconds) at which the collector starts reading.
    #[arg(long, default_value_t = 0.0)]
    pub recovery_start: f64,
    #[arg(long, default_value_t = 120.0)]
    pub gap_threshold: f64,
    /// Replay on a seeded random subset of this many nodes.
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub budget: Vec<Budget>,
    #[arg(long, value_delimiter = ',')]
    pub w: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
    pub targets: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthTraceArgs {
    #[arg(long, default_value_t = 100)]
    pub nodes: usize,
    /// Seconds.
    #[arg(long, default_value_t = 86_400.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 60.0)]
    pub interval: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub width: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub height: f64,
    #[arg(long, default_value_t = 2.0)]
    pub speed_low: f64,
    #[arg(long, default_value_t = 12.0)]
    pub speed_high: f64,
    #[arg(long, default_value_t = 0.02)]
    pub drop_probability: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

/// Identity of one cell of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CellKey {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub n: usize,
    #[serde(rename = "T")]
    pub budget: String,
    pub w: u64,
    /// Packets placed in the network, w·T.
    pub m: u64,
    pub recovery_start: f64,
    pub file: String,
}

#[derive(Debug, Serialize)]
pub struct CellReport {
    #[serde(flatten)]
    pub key: CellKey,
    #[serde(flatten)]
    pub summary: Option<CellSummary>,
    pub dissemination_before_recovery: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Reduction {
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<Scenario>,
    #[serde(rename = "T")]
    budget: String,
    recovery_start: f64,
    w_low: u64,
    w_high: u64,
    target: f64,
    d_low: f64,
    d_high: f64,
    /// `1 − d_high / d_low`.
    reduction: f64,
}

fn check_targets(targets: &[f64]) -> Result<()> {
    ensure!(!targets.is_empty(), "--targets must not be empty");
    if let Some(p) = targets.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        bail!("target probability {p} must lie in (0, 1]");
    }
    Ok(())
}

fn ws_for(requested: &[u64], budget: Budget, n: usize) -> Vec<u64> {
    if requested.is_empty() {
        ProtocolParams::legal_ws(budget, n)
    } else {
        requested.to_vec()
    }
}

fn cell_file(scenario: Option<Scenario>, budget: Budget, w: u64, recovery_start: f64, format: Format) -> String {
    let prefix = scenario.map_or("trace".to_string(), |s| s.name().to_string());
    format!("{prefix}_T{budget}_w{w}_rs{recovery_start}.{}", format.extension())
}

fn render_cell<A: Serialize>(spec: &ExperimentSpec<A>, key: &CellKey, result: &ExperimentResult, format: Format) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut out = spec.csv_comment()?.into_bytes();
            out.extend(format!("# cell: {}\n", serde_json::to_string(key)?).into_bytes());
            write_delay_csv(result, &mut out)?;
            out
        }
        Format::Json => {
            let rows: Vec<_> = result
                .outcomes
                .iter()
                .map(|o| serde_json::json!({ "trial": o.trial, "delay": o.delay, "censored": o.is_censored() }))
                .collect();
            serde_json::to_vec_pretty(&serde_json::json!({ "spec": spec, "cell": key, "outcomes": rows }))?
        }
    })
}

/// Runs every cell, writes each cell's file and `summary.json`, and fails
/// afterwards if any cell failed.
fn run_cells<A, F>(spec: &ExperimentSpec<A>, out_dir: &Path, format: Format, targets: &[f64], jobs: Option<usize>, cells: Vec<CellKey>, run: F) -> Result<()>
where
    A: Serialize + Sync,
    F: Fn(&CellKey) -> Result<ExperimentResult> + Sync,
{
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
    let reports: Vec<CellReport> = pool.install(|| {
        cells
            .into_par_iter()
            .map(|key| {
                let outcome = run(&key).and_then(|result| {
                    write_atomic(&out_dir.join(&key.file), &render_cell(spec, &key, &result, format)?)?;
                    Ok(result)
                });
                match outcome {
                    Ok(result) => CellReport {
                        summary: Some(CellSummary::from_distribution(&result.distribution(), targets)),
                        dissemination_before_recovery: Some(result.dissemination_completed_before(key.recovery_start)),
                        error: None,
                        key,
                    },
                    Err(e) => CellReport { key, summary: None, dissemination_before_recovery: None, error: Some(format!("{e:#}")) },
                }
            })
            .collect()
    });

    let reductions = d_reductions(&reports, targets);
    let summary = serde_json::json!({ "spec": spec, "cells": reports, "reductions": reductions });
    write_atomic(&out_dir.join("summary.json"), &serde_json::to_vec_pretty(&summary)?)?;

    let failed: Vec<String> = reports.iter().filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.key.file))).collect();
    for r in &reports {
        if let Some(s) = &r.summary {
            eprintln!("{}: mean {} censored {}", r.key.file, crate::output::field(s.mean), s.censored_count);
        }
    }
    if !failed.is_empty() {
        bail!("{} of {} cells failed:\n  {}", failed.len(), reports.len(), failed.join("\n  "));
    }
    Ok(())
}

/// For each group of cells differing only in `w`, the drop in the largest
/// target's wait time from the smallest to the largest `w`.
fn d_reductions(reports: &[CellReport], targets: &[f64]) -> Vec<Reduction> {
    let Some(&target) = targets.iter().max_by(|a, b| a.total_cmp(b)) else {
        return Vec::new();
    };
    let mut groups: BTreeMap<(String, String, String), Vec<&CellReport>> = BTreeMap::new();
    for r in reports {
        let scenario = r.key.scenario.map(|s| s.name().to_string()).unwrap_or_default();
        groups.entry((scenario, r.key.budget.clone(), r.key.recovery_start.to_string())).or_default().push(r);
    }
    let wait = |r: &CellReport| r.summary.as_ref().and_then(|s| s.d_p.get(&target.to_string()).copied().flatten());
    groups
        .into_values()
        .filter_map(|cells| {
            let lo = cells.iter().min_by_key(|r| r.key.w)?;
            let hi = cells.iter().max_by_key(|r| r.key.w)?;
            let (d_low, d_high) = (wait(lo)?, wait(hi)?);
            (lo.key.w != hi.key.w && d_low > 0.0).then(|| Reduction {
                scenario: lo.key.scenario,
                budget: lo.key.budget.clone(),
                recovery_start: lo.key.recovery_start,
                w_low: lo.key.w,
                w_high: hi.key.w,
                target,
                d_low,
                d_high,
                reduction: 1.0 - d_high / d_low,
            })
        })
        .collect()
}

fn packets(w: u64, budget: Budget) -> u64 {
    // legal cells have w·T integral
    (w as f64 * budget.value()).round() as u64
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    check_targets(&args.targets)?;
    let mut configs = Vec::new();
    let mut problems = Vec::new();
    for &scenario in &args.scenario {
        for &budget in &args.budget {
            for &rs in &args.recovery_start {
                for w in ws_for(&args.w, budget, args.nodes) {
                    let mut c = SimConfig::preset(scenario, budget, w, rs);
                    c.n = args.nodes;
                    c.trials = args.trials;
                    c.master_seed = args.seed;
                    c.max_steps = args.max_steps.unwrap_or_else(|| default_max_steps(rs));
                    match c.validate() {
                        Ok(()) => configs.push(c),
                        Err(e) => problems.push(format!("{scenario} T={budget} w={w} recovery-start={rs}: {e}")),
                    }
                }
            }
        }
    }
    if !problems.is_empty() {
        bail!("invalid experiment cells:\n  {}", problems.join("\n  "));
    }
    ensure!(!configs.is_empty(), "the sweep has no cells");

    let keys: Vec<CellKey> = configs
        .iter()
        .map(|c| CellKey {
            scenario: c.scenario,
            n: c.n,
            budget: c.budget.to_string(),
            w: c.w,
            m: packets(c.w, c.budget),
            recovery_start: c.recovery_start as f64,
            file: cell_file(c.scenario, c.budget, c.w, c.recovery_start as f64, args.format),
        })
        .collect();
    let spec = ExperimentSpec::new("simulate", args);
    run_cells(&spec, &args.output, args.format, &args.targets, args.jobs, keys, |key| {
        let config = configs.iter().find(|c| cell_file(c.scenario, c.budget, c.w, c.recovery_start as f64, args.format) == key.file).expect("cell");
        Ok(run_experiment(config)?)
    })
}

fn load_trace(args: &ReplayArgs) -> Result<TraceDataset> {
    let file = fs::File::open(&args.trace).with_context(|| format!("opening {}", args.trace.display()))?;
    let dataset = parse_trace(std::io::BufReader::new(file), args.mode).with_context(|| format!("parsing {}", args.trace.display()))?;
    Ok(match args.subsample {
        Some(k) => dataset.subsample(k, args.seed)?,
        None => dataset,
    })
}

pub fn replay(args: &ReplayArgs) -> Result<()> {
    check_targets(&args.targets)?;
    ensure!(args.trials > 0, "--trials must be positive");
    let dataset = load_trace(args)?;
    let config = TraceReplayConfig {
        comm_range: args.range,
        time_step: args.time_step,
        recovery_start: args.recovery_start,
        gap_threshold: args.gap_threshold,
    };
    config.validate()?;
    let (_, end) = dataset.span().context("trace has no readings")?;
    ensure!(args.recovery_start <= end, "trace ends at {end} s, before --recovery-start {}", args.recovery_start);
    let n = dataset.len();
    let mut cells = Vec::new();
    let mut problems = Vec::new();
    for &budget in &args.budget {
        for w in ws_for(&args.w, budget, n) {
            match ProtocolParams::new(w, budget, n) {
                Ok(_) => cells.push((budget, w)),
                Err(e) => problems.push(format!("T={budget} w={w}: {e}")),
            }
        }
    }
    if !problems.is_empty() {
        bail!("invalid experiment cells:\n  {}", problems.join("\n  "));
    }
    ensure!(!cells.is_empty(), "the sweep has no cells");

    let keys = cells
        .iter()
        .map(|&(budget, w)| CellKey {
            scenario: None,
            n,
            budget: budget.to_string(),
            w,
            m: packets(w, budget),
            recovery_start: args.recovery_start,
            file: cell_file(None, budget, w, args.recovery_start, args.format),
        })
        .collect();
    let spec = ExperimentSpec::new("replay", args);
    run_cells(&spec, &args.output, args.format, &args.targets, args.jobs, keys, |key| {
        let budget: Budget = key.budget.parse()?;
        Ok(replay_experiment(&dataset, &config, key.w, budget, args.trials, args.seed)?)
    })
}

pub fn synth_trace(args: &SynthTraceArgs) -> Result<()> {
    let spec = SyntheticTraceSpec {
        nodes: args.nodes,
        duration: args.duration,
        interval: args.interval,
        width: args.width,
        height: args.height,
        speed_low: args.speed_low,
        speed_high: args.speed_high,
        drop_probability: args.drop_probability,
    };
    let dataset = synthetic_trace(&spec, args.seed)?;
    let mut out = ExperimentSpec::new("synth-trace", args).csv_comment()?.into_bytes();
    dataset.write_csv(&mut out)?;
    write_atomic(&args.output, &out)
}

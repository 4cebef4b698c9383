//! Per-cell output: the `trial,delay,censored` table and summary statistics.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use storalloc::DelayDistribution;

use crate::experiment::ExperimentResult;
use crate::SimError;

pub const DEFAULT_TARGETS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub trials: usize,
    /// Mean over recovered trials; `None` when every trial was censored.
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    /// Wait time per target probability, keyed by the target as written;
    /// `None` when censoring makes the target unattainable.
    pub d_p: BTreeMap<String, Option<f64>>,
    pub censored_count: usize,
    pub ecdf_knots: Vec<(f64, f64)>,
}

impl CellSummary {
    pub fn from_distribution(dist: &DelayDistribution, targets: &[f64]) -> Self {
        let d_p = targets.iter().map(|&p| (p.to_string(), dist.wait_time(p).ok())).collect();
        Self {
            trials: dist.trials(),
            mean: dist.mean(),
            stderr: dist.stderr(),
            d_p,
            censored_count: dist.censored_count(),
            ecdf_knots: dist.ecdf_knots(),
        }
    }
}

/// Writes one row per trial; censored trials have an empty delay.
pub fn write_delay_csv<W: Write>(result: &ExperimentResult, writer: W) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["trial", "delay", "censored"])?;
    for o in &result.outcomes {
        let delay = o.delay.map(|d| d.to_string()).unwrap_or_default();
        out.write_record([o.trial.to_string(), delay, o.is_censored().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a table written by [`write_delay_csv`], skipping `#` lines.
pub fn read_delay_csv<R: std::io::Read>(reader: R) -> Result<DelayDistribution, SimError> {
    let mut input = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut outcomes = Vec::new();
    for (i, record) in input.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 2, |p| p.line());
        let bad = |message: String| SimError::Parse { line, message };
        let censored: bool = record
            .get(2)
            .ok_or_else(|| bad("missing censored flag".into()))?
            .parse()
            .map_err(|_| bad("censored flag must be true or false".into()))?;
        let delay = match (censored, record.get(1).unwrap_or("")) {
            (true, _) => None,
            (false, raw) => Some(raw.parse::<f64>().map_err(|_| bad(format!("delay {raw:?} is not a number")))?),
        };
        outcomes.push(delay);
    }
    Ok(DelayDistribution::from_outcomes(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::TrialOutcome;

    fn outcome(trial: u64, delay: Option<f64>) -> TrialOutcome {
        TrialOutcome { trial, delay, dissemination_completed_at: None, source: 0, collector: 1 }
    }

    #[test]
    fn csv_round_trip_keeps_censoring() {
        let result = ExperimentResult { outcomes: vec![outcome(0, Some(3.0)), outcome(1, None), outcome(2, Some(0.0))] };
        let mut buf = Vec::new();
        write_delay_csv(&result, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().next(), Some("trial,delay,censored"));
        let dist = read_delay_csv(buf.as_slice()).unwrap();
        assert_eq!(dist, result.distribution());
    }

    #[test]
    fn summary_marks_unattainable_targets() {
        let dist = DelayDistribution::new(vec![1.0, 2.0], 2);
        let s = CellSummary::from_distribution(&dist, &DEFAULT_TARGETS);
        assert_eq!(s.d_p["0.5"], Some(2.0));
        assert_eq!(s.d_p["0.9"], None);
        assert_eq!(s.censored_count, 2);
    }
}

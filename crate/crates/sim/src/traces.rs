//! Replaying recorded mobility traces.
//!
//! Trace files are CSV rows `node_id,t_seconds,x_m,y_m` (or
//! `node_id,t_seconds,lat,lon` in lat/lon mode). Positions between readings
//! are linearly interpolated; a node is inactive outside its recorded span
//! and across any gap between readings longer than the gap threshold.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use storalloc::protocol::ProtocolParams;
use storalloc::Budget;

use crate::exchange::{Point, ProtocolRun};
use crate::experiment::{trial_rng, ExperimentResult, TrialOutcome};
use crate::SimError;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoordinateMode {
    Planar,
    LatLon,
}

impl FromStr for CoordinateMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planar" | "xy" => Ok(Self::Planar),
            "latlon" | "lat-lon" => Ok(Self::LatLon),
            other => Err(SimError::UnknownMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reading {
    pub t: f64,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTrace {
    pub id: String,
    pub readings: Vec<Reading>,
}

impl NodeTrace {
    /// Interpolated position at `t`, or `None` while inactive.
    pub fn position_at(&self, t: f64, gap_threshold: f64) -> Option<Point> {
        let r = &self.readings;
        let first = r.first()?;
        let last = r.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let after = r.partition_point(|x| x.t < t);
        if r[after].t == t {
            return Some(r[after].position);
        }
        let (a, b) = (&r[after - 1], &r[after]);
        if b.t - a.t > gap_threshold {
            return None;
        }
        let f = (t - a.t) / (b.t - a.t);
        Some(Point::new(
            a.position.x + f * (b.position.x - a.position.x),
            a.position.y + f * (b.position.y - a.position.y),
        ))
    }
}

/// Per-node, time-ordered position readings in planar meters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceDataset {
    nodes: Vec<NodeTrace>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TraceDataset {
    pub fn new(nodes: Vec<NodeTrace>) -> Result<Self, SimError> {
        let mut index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.readings.windows(2).any(|w| w[1].t <= w[0].t) {
                return Err(SimError::Config(format!("timestamps of node {} are not strictly increasing", node.id)));
            }
            if node.readings.iter().any(|r| !(r.t.is_finite() && r.position.x.is_finite() && r.position.y.is_finite())) {
                return Err(SimError::Config(format!("node {} has a non-finite reading", node.id)));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return Err(SimError::Config(format!("duplicate node {}", node.id)));
            }
        }
        Ok(Self { nodes, index })
    }

    pub fn nodes(&self) -> &[NodeTrace] {
        &self.nodes
    }

    pub fn roster(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Earliest and latest reading over all nodes.
    pub fn span(&self) -> Option<(f64, f64)> {
        let readings = self.nodes.iter().flat_map(|n| n.readings.iter());
        let (lo, hi) = readings.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.t), hi.max(r.t)));
        (lo <= hi).then_some((lo, hi))
    }

    pub fn position_at(&self, node: &str, t: f64, gap_threshold: f64) -> Result<Option<Point>, SimError> {
        let i = *self.index.get(node).ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        Ok(self.nodes[i].position_at(t, gap_threshold))
    }

    /// Seeded uniform choice of `k` nodes, keeping roster order.
    pub fn subsample(&self, k: usize, seed: u64) -> Result<Self, SimError> {
        if k > self.nodes.len() {
            return Err(SimError::Config(format!("cannot pick {k} of {} nodes", self.nodes.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = sample(&mut rng, self.nodes.len(), k).into_vec();
        picked.sort_unstable();
        Self::new(picked.into_iter().map(|i| self.nodes[i].clone()).collect())
    }

    /// Writes the dataset in the planar CSV format, readings grouped by node.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["node_id", "t_seconds", "x_m", "y_m"])?;
        for node in &self.nodes {
            for r in &node.readings {
                out.write_record([node.id.clone(), r.t.to_string(), r.position.x.to_string(), r.position.y.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn parse_field(record: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<f64, SimError> {
    let raw = record.get(i).ok_or_else(|| SimError::Parse { line, message: format!("missing {name}") })?;
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| SimError::Parse { line, message: format!("{name} {raw:?} is not a number") })?;
    if !value.is_finite() {
        return Err(SimError::Parse { line, message: format!("{name} is not finite") });
    }
    Ok(value)
}

/// Parses a trace file. A header row starting with `node_id` is skipped,
/// as are blank lines and `#` comments. Each node's rows must have strictly
/// increasing timestamps, though nodes may interleave.
pub fn parse_trace<R: Read>(input: R, mode: CoordinateMode) -> Result<TraceDataset, SimError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(f64, f64, f64)>> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| SimError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("node_id")) {
            continue;
        }
        if record.len() != 4 {
            return Err(SimError::Parse { line, message: format!("expected 4 fields, found {}", record.len()) });
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(SimError::Parse { line, message: "empty node id".into() });
        }
        let t = parse_field(&record, 1, "timestamp", line)?;
        let a = parse_field(&record, 2, "first coordinate", line)?;
        let b = parse_field(&record, 3, "second coordinate", line)?;
        let node_rows = rows.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if let Some(prev) = node_rows.last() {
            if t <= prev.0 {
                return Err(SimError::NonMonotone { line, node: id });
            }
        }
        node_rows.push((t, a, b));
    }

    let to_point: Box<dyn Fn(f64, f64) -> Point> = match mode {
        CoordinateMode::Planar => Box::new(Point::new),
        CoordinateMode::LatLon => {
            let all: Vec<&(f64, f64, f64)> = rows.values().flatten().collect();
            let count = all.len().max(1) as f64;
            let lat0 = all.iter().map(|r| r.1).sum::<f64>() / count;
            let lon0 = all.iter().map(|r| r.2).sum::<f64>() / count;
            Box::new(move |lat, lon| project_equirectangular(lat, lon, lat0, lon0))
        }
    };
    let nodes = order
        .into_iter()
        .map(|id| {
            let readings = rows[&id].iter().map(|(t, a, b)| Reading { t: *t, position: to_point(*a, *b) }).collect();
            NodeTrace { id, readings }
        })
        .collect();
    TraceDataset::new(nodes)
}

/// Local equirectangular projection about `(lat0, lon0)`, in meters.
pub fn project_equirectangular(lat: f64, lon: f64, lat0: f64, lon0: f64) -> Point {
    let x = EARTH_RADIUS_M * (lon - lon0).to_radians() * lat0.to_radians().cos();
    let y = EARTH_RADIUS_M * (lat - lat0).to_radians();
    Point::new(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceReplayConfig {
    pub comm_range: f64,
    /// Seconds between simulation steps.
    pub time_step: f64,
    /// Absolute timestamp at which the collector starts reading.
    pub recovery_start: f64,
    pub gap_threshold: f64,
}

impl Default for TraceReplayConfig {
    fn default() -> Self {
        Self { comm_range: 20.0, time_step: 60.0, recovery_start: 0.0, gap_threshold: 120.0 }
    }
}

impl TraceReplayConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.comm_range > 0.0 && self.comm_range.is_finite()) {
            return Err(SimError::Config(format!("communication range {} must be positive", self.comm_range)));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(SimError::Config(format!("time step {} must be positive", self.time_step)));
        }
        if self.gap_threshold.is_nan() || self.gap_threshold <= 0.0 {
            return Err(SimError::Config(format!("gap threshold {} must be positive", self.gap_threshold)));
        }
        if !self.recovery_start.is_finite() {
            return Err(SimError::Config("recovery start must be finite".into()));
        }
        Ok(())
    }
}

/// One replay: a random source/collector pair from the roster, positions
/// sampled at step boundaries from the trace. Delays are in seconds.
pub fn replay_trial<R: Rng + ?Sized>(dataset: &TraceDataset, config: &TraceReplayConfig, w: u64, budget: Budget, rng: &mut R) -> Result<TrialOutcome, SimError> {
    config.validate()?;
    let n = dataset.len();
    if n < 2 {
        return Err(SimError::Config(format!("trace has {n} nodes; need at least 2")));
    }
    let (start, end) = dataset.span().ok_or_else(|| SimError::Config("trace has no readings".into()))?;
    if config.recovery_start > end {
        return Err(SimError::Config(format!(
            "trace ends at {end} s, before the recovery start {}",
            config.recovery_start
        )));
    }
    let params = ProtocolParams::new(w, budget, n)?;
    let source = rng.random_range(0..n);
    let collector = (source + rng.random_range(1..n)) % n;
    let mut run = ProtocolRun::new(params, source, collector)?;
    let mut completed_at = run.dissemination_complete().then_some(start);
    let mut positions: Vec<Option<Point>> = vec![None; n];
    let mut delay = None;
    let mut k: u64 = 0;
    loop {
        let t = start + k as f64 * config.time_step;
        if t > end {
            break;
        }
        for (slot, node) in positions.iter_mut().zip(dataset.nodes()) {
            *slot = node.position_at(t, config.gap_threshold);
        }
        run.exchange(&positions, config.comm_range, rng);
        if completed_at.is_none() && run.dissemination_complete() {
            completed_at = Some(t);
        }
        if t >= config.recovery_start && run.collector_read(&positions, config.comm_range) {
            delay = Some(t - config.recovery_start);
            break;
        }
        k += 1;
    }
    Ok(TrialOutcome { trial: 0, delay, dissemination_completed_at: completed_at, source, collector })
}

pub fn replay_experiment(dataset: &TraceDataset, config: &TraceReplayConfig, w: u64, budget: Budget, trials: usize, master_seed: u64) -> Result<ExperimentResult, SimError> {
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            replay_trial(dataset, config, w, budget, &mut rng).map(|o| TrialOutcome { trial: i, ..o })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentResult { outcomes })
}

/// Parameters of a synthetic random-waypoint trace with unsynchronized,
/// occasionally missing readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticTraceSpec {
    pub nodes: usize,
    pub duration: f64,
    pub interval: f64,
    pub width: f64,
    pub height: f64,
    /// Meters per second.
    pub speed_low: f64,
    pub speed_high: f64,
    /// Chance that any given reading is dropped.
    pub drop_probability: f64,
}

impl Default for SyntheticTraceSpec {
    fn default() -> Self {
        Self {
            nodes: 100,
            duration: 86_400.0,
            interval: 60.0,
            width: 5000.0,
            height: 5000.0,
            speed_low: 2.0,
            speed_high: 12.0,
            drop_probability: 0.02,
        }
    }
}

pub fn synthetic_trace(spec: &SyntheticTraceSpec, seed: u64) -> Result<TraceDataset, SimError> {
    if spec.nodes == 0 || spec.interval.is_nan() || spec.interval <= 0.0 || spec.duration.is_nan() || spec.duration < 0.0 || spec.speed_low > spec.speed_high {
        return Err(SimError::Config("invalid synthetic trace parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| Point::new(rng.random_range(0.0..=spec.width), rng.random_range(0.0..=spec.height));
    let mut nodes = Vec::with_capacity(spec.nodes);
    for i in 0..spec.nodes {
        let mut pos = point(&mut rng);
        let mut dest = point(&mut rng);
        let mut speed = rng.random_range(spec.speed_low..=spec.speed_high);
        let offset = rng.random_range(0.0..spec.interval);
        let mut readings = Vec::new();
        let mut t = offset;
        let mut last_t = 0.0;
        while t <= spec.duration {
            let mut budget = speed * (t - last_t);
            while budget > 0.0 {
                let remaining = pos.distance_squared(&dest).sqrt();
                if remaining <= budget {
                    budget -= remaining;
                    pos = dest;
                    dest = point(&mut rng);
                    speed = rng.random_range(spec.speed_low..=spec.speed_high);
                } else {
                    let f = budget / remaining;
                    pos = Point::new(pos.x + f * (dest.x - pos.x), pos.y + f * (dest.y - pos.y));
                    budget = 0.0;
                }
            }
            last_t = t;
            if !rng.random_bool(spec.drop_probability.clamp(0.0, 1.0)) {
                readings.push(Reading { t, position: pos });
            }
            t += spec.interval;
        }
        nodes.push(NodeTrace { id: format!("node{i:03}"), readings });
    }
    TraceDataset::new(nodes)
}

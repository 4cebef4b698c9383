//! Spatial simulation of coded spray-and-wait dissemination and recovery:
//! random-waypoint mobility, trace replay, and experiment harnesses.

pub mod config;
pub mod exchange;
pub mod experiment;
pub mod report;
pub mod traces;
pub mod world;

use storalloc::analytics::AnalyticsError;
use storalloc::protocol::ProtocolError;
use thiserror::Error;

pub use config::{default_max_steps, Scenario, SimConfig};
pub use exchange::{Link, Point, ProtocolRun};
pub use experiment::{fit_contact_rate, run_experiment, run_trial, trial_rng, trial_seed, ExperimentResult, TrialOutcome};
pub use report::{read_delay_csv, write_delay_csv, CellSummary, DEFAULT_TARGETS};
pub use traces::{parse_trace, replay_experiment, replay_trial, CoordinateMode, TraceDataset, TraceReplayConfig};
pub use world::World;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: timestamps of node {node} are not strictly increasing")]
    NonMonotone { line: u64, node: String },
    #[error("unknown coordinate mode {0:?} (expected planar or latlon)")]
    UnknownMode(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

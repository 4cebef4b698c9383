use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use storalloc::protocol::ProtocolParams;
use storalloc::Budget;

use crate::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Baseline,
    HighMobility,
    HighConnectivity,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Baseline, Scenario::HighMobility, Scenario::HighConnectivity];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::HighMobility => "high-mobility",
            Scenario::HighConnectivity => "high-connectivity",
        }
    }

    /// `(comm_range, speed_low, speed_high)`
    pub fn parameters(&self) -> (f64, f64, f64) {
        match self {
            Scenario::Baseline => (20.0, 5.0, 10.0),
            Scenario::HighMobility => (20.0, 25.0, 50.0),
            Scenario::HighConnectivity => (80.0, 5.0, 10.0),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scenario {s:?}")))
    }
}

/// Parameters of one random-waypoint experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: usize,
    pub width: f64,
    pub height: f64,
    pub comm_range: f64,
    /// Per-step travel distance is drawn from `[speed_low, speed_high]`.
    pub speed_low: f64,
    pub speed_high: f64,
    pub scenario: Option<Scenario>,
    pub budget: Budget,
    pub w: u64,
    pub recovery_start: u64,
    /// Total steps simulated before a trial is censored.
    pub max_steps: u64,
    pub trials: usize,
    pub master_seed: u64,
}

pub fn default_max_steps(recovery_start: u64) -> u64 {
    (50 * recovery_start).max(100_000)
}

impl SimConfig {
    /// The 100-node, 1000×1000 setup for a named scenario.
    pub fn preset(scenario: Scenario, budget: Budget, w: u64, recovery_start: u64) -> Self {
        let (comm_range, speed_low, speed_high) = scenario.parameters();
        Self {
            n: 100,
            width: 1000.0,
            height: 1000.0,
            comm_range,
            speed_low,
            speed_high,
            scenario: Some(scenario),
            budget,
            w,
            recovery_start,
            max_steps: default_max_steps(recovery_start),
            trials: 500,
            master_seed: 0,
        }
    }

    pub fn protocol_params(&self) -> Result<ProtocolParams, SimError> {
        Ok(ProtocolParams::new(self.w, self.budget, self.n)?)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.n < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.n));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return bad(format!("grid {}×{} must be positive", self.width, self.height));
        }
        if !(self.comm_range > 0.0 && self.comm_range.is_finite()) {
            return bad(format!("communication range {} must be positive", self.comm_range));
        }
        if !(self.speed_low >= 0.0 && self.speed_low <= self.speed_high && self.speed_high.is_finite()) {
            return bad(format!("speed bounds [{}, {}] are invalid", self.speed_low, self.speed_high));
        }
        if self.trials == 0 {
            return bad("need at least one trial".into());
        }
        if self.max_steps <= self.recovery_start {
            return bad(format!("max_steps {} must exceed recovery_start {}", self.max_steps, self.recovery_start));
        }
        self.protocol_params()?;
        Ok(())
    }
}

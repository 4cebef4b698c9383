//! Random-waypoint world.

use rand::Rng;

use crate::config::SimConfig;
use crate::exchange::{Link, Point, ProtocolRun};
use crate::SimError;
use storalloc::protocol::TransferOutcome;

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    positions: Vec<Option<Point>>,
    destinations: Vec<Point>,
    run: ProtocolRun,
    step: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub transfers: Vec<(Link, TransferOutcome)>,
    /// Set when the collector read during this step.
    pub read: bool,
    pub recovered: bool,
}

fn uniform_point<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Point {
    Point::new(rng.random_range(0.0..=config.width), rng.random_range(0.0..=config.height))
}

impl World {
    /// Draws a distinct source/collector pair and uniform positions and destinations.
    pub fn random<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Self, SimError> {
        config.validate()?;
        let n = config.n;
        let source = rng.random_range(0..n);
        let collector = (source + rng.random_range(1..n)) % n;
        let positions = (0..n).map(|_| Some(uniform_point(config, rng))).collect();
        let destinations = (0..n).map(|_| uniform_point(config, rng)).collect();
        let run = ProtocolRun::new(config.protocol_params()?, source, collector)?;
        Ok(Self { positions, destinations, run, step: 0 })
    }

    /// A world with explicit placement, for hand-built scenarios.
    pub fn with_layout(config: &SimConfig, positions: Vec<Point>, destinations: Vec<Point>, source: usize, collector: usize) -> Result<Self, SimError> {
        config.validate()?;
        if positions.len() != config.n || destinations.len() != config.n {
            return Err(SimError::Config(format!("layout must place exactly {} nodes", config.n)));
        }
        let run = ProtocolRun::new(config.protocol_params()?, source, collector)?;
        Ok(Self {
            positions: positions.into_iter().map(Some).collect(),
            destinations,
            run,
            step: 0,
        })
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn positions(&self) -> &[Option<Point>] {
        &self.positions
    }

    pub fn destinations(&self) -> &[Point] {
        &self.destinations
    }

    pub fn protocol(&self) -> &ProtocolRun {
        &self.run
    }

    fn move_nodes<R: Rng + ?Sized>(&mut self, config: &SimConfig, rng: &mut R) {
        for i in 0..self.positions.len() {
            let pos = self.positions[i].expect("waypoint nodes are always active");
            let dest = self.destinations[i];
            let travel = rng.random_range(config.speed_low..=config.speed_high);
            let remaining = pos.distance_squared(&dest).sqrt();
            if remaining <= travel {
                // arrival clamps at the waypoint and picks the next one
                self.positions[i] = Some(dest);
                self.destinations[i] = uniform_point(config, rng);
            } else {
                let f = travel / remaining;
                self.positions[i] = Some(Point::new(pos.x + f * (dest.x - pos.x), pos.y + f * (dest.y - pos.y)));
            }
        }
    }

    /// Advances mobility only, leaving the protocol untouched.
    pub fn step_mobility<R: Rng + ?Sized>(&mut self, config: &SimConfig, rng: &mut R) {
        self.move_nodes(config, rng);
        self.step += 1;
    }

    /// One time step: move, schedule and run transfers, then let the
    /// collector read if recovery has started.
    pub fn step<R: Rng + ?Sized>(&mut self, config: &SimConfig, rng: &mut R) -> StepReport {
        self.move_nodes(config, rng);
        let transfers = self.run.exchange(&self.positions, config.comm_range, rng);
        let read = self.step >= config.recovery_start;
        let recovered = if read {
            self.run.collector_read(&self.positions, config.comm_range)
        } else {
            self.run.is_recovered()
        };
        self.step += 1;
        StepReport { transfers, read, recovered }
    }
}

//! Per-step contact machinery shared by the random-waypoint world and trace
//! replay: link scheduling under the interference rule, protocol transfers
//! and the collector's reads.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use storalloc::protocol::{init_dissemination, is_dissemination_complete, on_contact, transfer_applies, NodeState, ProtocolError, ProtocolParams, TransferOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_squared(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn within(&self, other: &Point, range: f64) -> bool {
        self.distance_squared(other) <= range * range
    }
}

/// A directed transmission from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Link {
    pub from: usize,
    pub to: usize,
}

/// Ordered pairs within range over which a protocol transfer would move
/// packets. Inactive nodes (`None`) take no part.
pub fn candidate_links(positions: &[Option<Point>], nodes: &[NodeState], range: f64) -> Vec<Link> {
    let mut links = Vec::new();
    for (from, giver) in nodes.iter().enumerate() {
        let Some(p) = positions[from] else { continue };
        if giver.logical_packets <= 1 {
            continue;
        }
        for (to, receiver) in nodes.iter().enumerate() {
            if to == from || !transfer_applies(giver.logical_packets, receiver.logical_packets) {
                continue;
            }
            if positions[to].is_some_and(|q| p.within(&q, range)) {
                links.push(Link { from, to });
            }
        }
    }
    links
}

/// Whether adding `link` to `accepted` keeps the schedule legal: every node
/// in at most one link, and no receiver within range of a second scheduled
/// transmitter.
pub fn compatible(link: Link, accepted: &[Link], positions: &[Option<Point>], range: f64) -> bool {
    let pos = |i: usize| positions[i].expect("scheduled nodes are active");
    accepted.iter().all(|other| {
        let disjoint = link.from != other.from && link.from != other.to && link.to != other.from && link.to != other.to;
        disjoint && !pos(link.from).within(&pos(other.to), range) && !pos(other.from).within(&pos(link.to), range)
    })
}

/// Random maximal schedule: shuffle the candidates and greedily keep every
/// link compatible with those already kept.
pub fn schedule_transmissions<R: Rng + ?Sized>(mut candidates: Vec<Link>, positions: &[Option<Point>], range: f64, rng: &mut R) -> Vec<Link> {
    candidates.shuffle(rng);
    let mut accepted: Vec<Link> = Vec::new();
    for link in candidates {
        if compatible(link, &accepted, positions, range) {
            accepted.push(link);
        }
    }
    accepted
}

/// Checks every constraint of a schedule; used by tests and debug builds.
pub fn schedule_is_legal(schedule: &[Link], positions: &[Option<Point>], range: f64) -> bool {
    schedule.iter().enumerate().all(|(i, link)| {
        positions[link.from].zip(positions[link.to]).is_some_and(|(a, b)| a.within(&b, range))
            && compatible(*link, &schedule[..i], positions, range)
            && compatible(*link, &schedule[i + 1..], positions, range)
    })
}

/// Protocol state of one trial plus the collector's recovery tally.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    params: ProtocolParams,
    nodes: Vec<NodeState>,
    source: usize,
    collector: usize,
    credited: Vec<u64>,
    tally: u64,
}

impl ProtocolRun {
    pub fn new(params: ProtocolParams, source: usize, collector: usize) -> Result<Self, ProtocolError> {
        let nodes = init_dissemination(&params, source, collector)?;
        Ok(Self {
            credited: vec![0; nodes.len()],
            params,
            nodes,
            source,
            collector,
            tally: 0,
        })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn collector(&self) -> usize {
        self.collector
    }

    /// Distinct packets the collector has accessed so far.
    pub fn tally(&self) -> u64 {
        self.tally
    }

    pub fn is_recovered(&self) -> bool {
        self.tally >= self.params.w()
    }

    pub fn dissemination_complete(&self) -> bool {
        is_dissemination_complete(&self.nodes)
    }

    /// Schedules and executes this step's transfers.
    pub fn exchange<R: Rng + ?Sized>(&mut self, positions: &[Option<Point>], range: f64, rng: &mut R) -> Vec<(Link, TransferOutcome)> {
        if self.dissemination_complete() {
            return Vec::new();
        }
        let candidates = candidate_links(positions, &self.nodes, range);
        if candidates.is_empty() {
            return Vec::new();
        }
        let schedule = schedule_transmissions(candidates, positions, range, rng);
        debug_assert!(schedule_is_legal(&schedule, positions, range));
        let w = self.params.w();
        schedule
            .into_iter()
            .map(|link| {
                let (giver, receiver) = pair_mut(&mut self.nodes, link.from, link.to);
                (link, on_contact(giver, receiver, w))
            })
            .collect()
    }

    /// The collector reads every active node in range, itself included.
    /// Each node contributes at most `min(packets, w)` over the whole trial.
    pub fn collector_read(&mut self, positions: &[Option<Point>], range: f64) -> bool {
        let Some(c) = positions[self.collector] else {
            return self.is_recovered();
        };
        let w = self.params.w();
        for (i, node) in self.nodes.iter().enumerate() {
            let available = node.physical_packets(w);
            if available > self.credited[i] && positions[i].is_some_and(|p| p.within(&c, range)) {
                self.tally += available - self.credited[i];
                self.credited[i] = available;
            }
        }
        self.is_recovered()
    }
}

fn pair_mut<T>(items: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = items.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = items.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use storalloc::Budget;

    fn at(points: &[(f64, f64)]) -> Vec<Option<Point>> {
        points.iter().map(|(x, y)| Some(Point::new(*x, *y))).collect()
    }

    #[test]
    fn second_transmitter_near_receiver_is_blocked() {
        // 0 → 1 and 2 → 3, but 2 sits within range of receiver 1
        let pos = at(&[(0.0, 0.0), (10.0, 0.0), (25.0, 0.0), (40.0, 0.0)]);
        let a = Link { from: 0, to: 1 };
        let b = Link { from: 2, to: 3 };
        assert!(!compatible(b, &[a], &pos, 20.0));
        assert!(compatible(b, &[a], &pos, 12.0));
        assert!(!compatible(Link { from: 0, to: 3 }, &[a], &pos, 100.0));
    }

    #[test]
    fn random_schedules_are_legal_and_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let pos: Vec<Option<Point>> = (0..30)
                .map(|_| Some(Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0))))
                .collect();
            let nodes: Vec<NodeState> = (0..30)
                .map(|i| NodeState { logical_packets: if i % 3 == 0 { 4 } else { 0 }, role: storalloc::protocol::Role::Relay })
                .collect();
            let candidates = candidate_links(&pos, &nodes, 25.0);
            let schedule = schedule_transmissions(candidates.clone(), &pos, 25.0, &mut rng);
            assert!(schedule_is_legal(&schedule, &pos, 25.0));
            for c in candidates {
                assert!(schedule.contains(&c) || !compatible(c, &schedule, &pos, 25.0));
            }
        }
    }

    #[test]
    fn collector_credits_each_node_once() {
        let params = ProtocolParams::new(2, Budget::from_integer(2).unwrap(), 4).unwrap();
        let mut run = ProtocolRun::new(params, 0, 1).unwrap();
        let pos = at(&[(0.0, 0.0), (5.0, 0.0), (500.0, 0.0), (900.0, 0.0)]);
        // source holds 4 logical packets but only 2 physical
        assert!(run.collector_read(&pos, 10.0));
        assert_eq!(run.tally(), 2);
        assert!(run.collector_read(&pos, 10.0));
        assert_eq!(run.tally(), 2);
    }

    #[test]
    fn inactive_nodes_are_invisible() {
        let params = ProtocolParams::new(1, Budget::from_integer(2).unwrap(), 3).unwrap();
        let mut run = ProtocolRun::new(params, 0, 1).unwrap();
        let pos = vec![Some(Point::new(0.0, 0.0)), None, Some(Point::new(1.0, 0.0))];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let moved = run.exchange(&pos, 10.0, &mut rng);
        assert_eq!(moved.len(), 1);
        assert_eq!(moved[0].0, Link { from: 0, to: 2 });
        assert!(!run.collector_read(&pos, 10.0));
    }
}

//! Coded spray-and-wait dissemination.
//!
//! The source starts with `wT` coded packets, each `1/w` of the object.
//! When a node holding more than one packet meets a node holding none, it
//! hands over half of its packets, or a single packet once it is down to
//! `w` or fewer. Dissemination ends when no node holds more than one packet.
//! A node never physically stores or sends more than `w` packets; the rest
//! are regenerated on demand.

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{Allocation, AnalyticsError};
use crate::budget::Budget;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("dissemination is not complete: a node still holds {max_packets} packets")]
    Incomplete { max_packets: u64 },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolParams {
    w: u64,
    budget: Budget,
    n: usize,
}

impl ProtocolParams {
    pub fn new(w: u64, budget: Budget, n: usize) -> Result<Self, ProtocolError> {
        if w == 0 {
            return Err(ProtocolError::Config("w must be a positive integer".into()));
        }
        if n < 2 {
            return Err(ProtocolError::Config(format!("need at least 2 nodes, got {n}")));
        }
        if !budget.times_is_integer(w) {
            return Err(ProtocolError::Config(format!("w·T = {w}·{budget} is not an integer packet count")));
        }
        let packets = budget.floor_times(w);
        if packets > n as u64 {
            return Err(ProtocolError::Config(format!(
                "w·T = {packets} exceeds n = {n}; dissemination could never end with at most one packet per node"
            )));
        }
        Ok(Self { w, budget, n })
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `wT`
    pub fn initial_packets(&self) -> u64 {
        self.budget.floor_times(self.w)
    }

    /// Every `w` for which `(w, T, n)` is a legal configuration.
    pub fn legal_ws(budget: Budget, n: usize) -> Vec<u64> {
        (1..=budget.floor_divide(n as u64))
            .filter(|w| budget.times_is_integer(*w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Source,
    Relay,
    Collector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeState {
    /// Packets the node can produce, including ones regenerated on demand.
    pub logical_packets: u64,
    pub role: Role,
}

impl NodeState {
    pub fn relay() -> Self {
        Self { logical_packets: 0, role: Role::Relay }
    }

    pub fn physical_packets(&self, w: u64) -> u64 {
        self.logical_packets.min(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct TransferOutcome {
    pub packets_moved: u64,
    /// Packets actually sent over the link, capped at `w`.
    pub physical_packets_transmitted: u64,
}

/// Whether a giver holding `giver` packets hands anything to a receiver holding `receiver`.
pub fn transfer_applies(giver: u64, receiver: u64) -> bool {
    giver > 1 && receiver == 0
}

pub fn init_dissemination(params: &ProtocolParams, source: usize, collector: usize) -> Result<Vec<NodeState>, ProtocolError> {
    let n = params.n();
    if source >= n || collector >= n {
        return Err(ProtocolError::Config(format!("source {source} / collector {collector} out of range for {n} nodes")));
    }
    if source == collector {
        return Err(ProtocolError::Config("source and collector must be distinct".into()));
    }
    let mut states = vec![NodeState::relay(); n];
    states[source] = NodeState { logical_packets: params.initial_packets(), role: Role::Source };
    states[collector].role = Role::Collector;
    Ok(states)
}

/// Applies one contact from `giver` to `receiver`; a no-op unless the
/// giver holds more than one packet and the receiver holds none.
pub fn on_contact(giver: &mut NodeState, receiver: &mut NodeState, w: u64) -> TransferOutcome {
    if !transfer_applies(giver.logical_packets, receiver.logical_packets) {
        return TransferOutcome::default();
    }
    let c = giver.logical_packets;
    // the giver keeps ⌈c/2⌉ on an odd split
    let moved = if c > w { c / 2 } else { 1 };
    giver.logical_packets -= moved;
    receiver.logical_packets += moved;
    TransferOutcome { packets_moved: moved, physical_packets_transmitted: moved.min(w) }
}

pub fn is_dissemination_complete(states: &[NodeState]) -> bool {
    states.iter().all(|s| s.logical_packets <= 1)
}

/// The allocation left behind once dissemination is complete:
/// `x_i = min(c_i, w) / w`.
pub fn realized_allocation(states: &[NodeState], w: u64, budget: Budget) -> Result<Allocation, ProtocolError> {
    if let Some(max_packets) = states.iter().map(|s| s.logical_packets).filter(|c| *c > 1).max() {
        return Err(ProtocolError::Incomplete { max_packets });
    }
    let amounts = states.iter().map(|s| s.physical_packets(w) as f64 / w as f64).collect();
    Ok(Allocation::new(amounts, budget.value())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> Budget {
        s.parse().unwrap()
    }

    fn node(c: u64) -> NodeState {
        NodeState { logical_packets: c, role: Role::Relay }
    }

    #[test]
    fn init_examples() {
        let p = ProtocolParams::new(4, b("5"), 100).unwrap();
        let s = init_dissemination(&p, 7, 3).unwrap();
        assert_eq!(s[7].logical_packets, 20);
        assert_eq!(s[7].role, Role::Source);
        assert_eq!(s[3].role, Role::Collector);
        assert_eq!(s.iter().map(|x| x.logical_packets).sum::<u64>(), 20);

        let p = ProtocolParams::new(1, b("1"), 2).unwrap();
        assert!(is_dissemination_complete(&init_dissemination(&p, 0, 1).unwrap()));

        assert!(matches!(ProtocolParams::new(3, b("5"), 10), Err(ProtocolError::Config(_))));
        assert!(ProtocolParams::new(1, b("2.5"), 10).is_err());
        assert!(ProtocolParams::new(2, b("2.5"), 10).is_ok());
        assert!(init_dissemination(&ProtocolParams::new(1, b("2"), 5).unwrap(), 2, 2).is_err());
    }

    #[test]
    fn contact_examples() {
        let (mut g, mut r) = (node(20), node(0));
        let out = on_contact(&mut g, &mut r, 4);
        assert_eq!((g.logical_packets, r.logical_packets), (10, 10));
        assert_eq!(out, TransferOutcome { packets_moved: 10, physical_packets_transmitted: 4 });

        let (mut g, mut r) = (node(3), node(0));
        on_contact(&mut g, &mut r, 4);
        assert_eq!((g.logical_packets, r.logical_packets), (2, 1));

        let (mut g, mut r) = (node(1), node(0));
        assert_eq!(on_contact(&mut g, &mut r, 3), TransferOutcome::default());
        assert_eq!((g.logical_packets, r.logical_packets), (1, 0));

        let (mut g, mut r) = (node(5), node(0));
        on_contact(&mut g, &mut r, 2);
        assert_eq!((g.logical_packets, r.logical_packets), (3, 2));

        // both hold packets: no rebalancing
        let (mut g, mut r) = (node(8), node(1));
        assert_eq!(on_contact(&mut g, &mut r, 2).packets_moved, 0);
    }

    #[test]
    fn completion() {
        assert!(is_dissemination_complete(&[node(0), node(1), node(1)]));
        assert!(!is_dissemination_complete(&[node(0), node(2)]));
        let p = ProtocolParams::new(2, b("5"), 20).unwrap();
        assert!(!is_dissemination_complete(&init_dissemination(&p, 0, 1).unwrap()));
    }

    #[test]
    fn realized_allocation_examples() {
        let states: Vec<_> = (0..8).map(|i| node(u64::from(i < 5))).collect();
        let a = realized_allocation(&states, 1, b("5")).unwrap();
        assert_eq!(a.amounts().iter().filter(|x| **x == 1.0).count(), 5);

        let states = vec![node(1); 100];
        let a = realized_allocation(&states, 10, b("10")).unwrap();
        assert!(a.amounts().iter().all(|x| *x == 0.1));

        let states: Vec<_> = (0..12).map(|i| node(u64::from(i < 10))).collect();
        let a = realized_allocation(&states, 2, b("5")).unwrap();
        assert_eq!(a.amounts().iter().filter(|x| **x == 0.5).count(), 10);

        assert!(matches!(
            realized_allocation(&[node(3), node(0)], 1, b("3")),
            Err(ProtocolError::Incomplete { max_packets: 3 })
        ));
    }

    #[test]
    fn legal_ws() {
        assert_eq!(ProtocolParams::legal_ws(b("10"), 100), (1..=10).collect::<Vec<_>>());
        assert_eq!(ProtocolParams::legal_ws(b("2.5"), 10), vec![2, 4]);
    }
}

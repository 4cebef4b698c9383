use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use storalloc::analytics::SymmetricAllocation;
use storalloc::protocol::{init_dissemination, is_dissemination_complete, on_contact, realized_allocation, NodeState, ProtocolParams};
use storalloc::Budget;

/// Every step an ordered pair of distinct nodes is drawn uniformly.
fn mix(states: &mut [NodeState], w: u64, rng: &mut ChaCha8Rng, mut check: impl FnMut(&[NodeState])) -> u64 {
    let n = states.len();
    let mut events = 0;
    while !is_dissemination_complete(states) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let (a, b) = if i < j {
            let (lo, hi) = states.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        } else {
            let (lo, hi) = states.split_at_mut(i);
            (&mut hi[0], &mut lo[j])
        };
        let out = on_contact(a, b, w);
        assert!(out.physical_packets_transmitted <= w);
        check(states);
        events += 1;
        assert!(events < 10_000_000, "mixing did not terminate");
    }
    events
}

fn arb_params() -> impl Strategy<Value = (usize, u64, u64)> {
    (2usize..60).prop_flat_map(|n| (Just(n), 1u64..=n as u64)).prop_flat_map(|(n, t)| (Just(n), Just(t), 1u64..=(n as u64 / t)))
}

proptest! {
    #[test]
    fn mixing_conserves_and_ends_symmetric((n, t, w) in arb_params(), seed in any::<u64>()) {
        let budget = Budget::from_integer(t).unwrap();
        let params = ProtocolParams::new(w, budget, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = init_dissemination(&params, 0, n - 1).unwrap();
        let mut largest = w * t;
        mix(&mut states, w, &mut rng, |s| {
            assert_eq!(s.iter().map(|x| x.logical_packets).sum::<u64>(), w * t);
            let max = s.iter().map(|x| x.logical_packets).max().unwrap();
            assert!(max <= largest);
            largest = max;
        });
        prop_assert_eq!(states.iter().filter(|s| s.logical_packets == 1).count() as u64, w * t);
        let alloc = realized_allocation(&states, w, budget).unwrap();
        let mut got = alloc.amounts().to_vec();
        let mut want = SymmetricAllocation::new(n as u64, budget, w * t).unwrap().expand().unwrap().amounts().to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn single_contact_rules(giver in 0u64..200, receiver in 0u64..3, w in 1u64..20) {
        let mut a = NodeState { logical_packets: giver, ..NodeState::relay() };
        let mut b = NodeState { logical_packets: receiver, ..NodeState::relay() };
        let out = on_contact(&mut a, &mut b, w);
        prop_assert_eq!(a.logical_packets + b.logical_packets, giver + receiver);
        if giver > 1 && receiver == 0 {
            let expect = if giver > w { giver / 2 } else { 1 };
            prop_assert_eq!(out.packets_moved, expect);
            prop_assert_eq!(a.logical_packets, giver - expect);
            prop_assert_eq!(out.physical_packets_transmitted, expect.min(w));
        } else {
            prop_assert_eq!(out.packets_moved, 0);
        }
    }
}

#[test]
fn incomplete_dissemination_has_no_allocation() {
    let budget = Budget::from_integer(4).unwrap();
    let params = ProtocolParams::new(2, budget, 10).unwrap();
    let states = init_dissemination(&params, 0, 1).unwrap();
    assert!(realized_allocation(&states, 2, budget).is_err());
}

#[test]
fn fractional_budgets_need_integer_packet_counts() {
    let budget: Budget = "2.5".parse().unwrap();
    assert!(ProtocolParams::new(1, budget, 10).is_err());
    assert_eq!(ProtocolParams::legal_ws(budget, 10), vec![2, 4]);
}

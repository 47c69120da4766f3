mod common;

use common::*;
use pisa_core::packet::Packet;
use pisa_core::sched::{
    build_scheduler, Admission, BufferError, CamOp, CamPrimitive, Fifo, PacketBuffer, Pifo, QueueFull, RangeCam,
    RankedEntry, Scheduler, SystolicQueue,
};
use pisa_core::spec::{SchedulerConfig, SchedulerKind};
use proptest::prelude::*;
use rand::Rng;

fn e(rank: u64, seq: u64) -> RankedEntry {
    RankedEntry::new(rank, seq, seq)
}

/// Replays a push/pop script against a stable sort of the pending ranks.
fn sorted_replay(ops: &[Option<u64>]) -> Vec<u64> {
    let mut pending: Vec<(u64, u64)> = Vec::new();
    let mut out = Vec::new();
    for (seq, op) in ops.iter().enumerate() {
        match op {
            Some(rank) => {
                pending.push((*rank, seq as u64));
                pending.sort_by_key(|p| p.0);
            }
            None => {
                if !pending.is_empty() {
                    out.push(pending.remove(0).1);
                }
            }
        }
    }
    out
}

fn random_script(r: &mut impl Rng, len: usize, max_rank: u64) -> Vec<Option<u64>> {
    (0..len)
        .map(|_| r.random_bool(0.55).then(|| r.random_range(0..max_rank)))
        .collect()
}

fn drive(q: &mut dyn Scheduler, ops: &[Option<u64>], steps_between: bool) -> Vec<u64> {
    let mut out = Vec::new();
    for (seq, op) in ops.iter().enumerate() {
        match op {
            Some(rank) => q.push(e(*rank, seq as u64)).unwrap(),
            None => out.extend(q.pop().map(|x| x.seq)),
        }
        if steps_between {
            q.tick();
        }
    }
    out
}

#[test]
fn pifo_sorts_by_rank() {
    let mut q = Pifo::new(8, 16);
    for (i, r) in [5, 2, 9].into_iter().enumerate() {
        q.push(e(r, i as u64)).unwrap();
    }
    let ranks: Vec<u64> = std::iter::from_fn(|| q.pop().map(|x| x.rank)).collect();
    assert_eq!(ranks, vec![2, 5, 9]);
    assert!(q.pop().is_none());
}

#[test]
fn pifo_ties_are_fifo() {
    let mut q = Pifo::new(8, 16);
    q.push(e(7, 1)).unwrap();
    q.push(e(7, 2)).unwrap();
    assert_eq!(q.pop().unwrap().seq, 1);
    assert_eq!(q.pop().unwrap().seq, 2);
}

#[test]
fn pifo_single_entry_and_full() {
    let mut q = Pifo::new(1, 16);
    q.push(e(3, 0)).unwrap();
    assert_eq!(q.push(e(1, 1)), Err(QueueFull));
    assert_eq!(q.pop(), Some(e(3, 0)));
    assert!(q.is_empty());
}

#[test]
#[should_panic(expected = "exceeds")]
fn pifo_rejects_oversized_rank() {
    Pifo::new(4, 8).push(e(256, 0)).unwrap();
}

#[test]
fn pifo_matches_stable_sort() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let ops = random_script(&mut r, 2000, 64);
        let mut q = Pifo::new(ops.len(), 16);
        assert_eq!(drive(&mut q, &ops, false), sorted_replay(&ops), "seed {seed}");
    }
}

#[test]
fn fifo_ignores_rank() {
    let mut q = Fifo::new(4);
    for (i, r) in [9, 1, 5].into_iter().enumerate() {
        q.push(e(r, i as u64)).unwrap();
    }
    let seqs: Vec<u64> = std::iter::from_fn(|| q.pop().map(|x| x.seq)).collect();
    assert_eq!(seqs, vec![0, 1, 2]);
}

#[test]
fn build_scheduler_honours_kind_and_capacity() {
    for kind in [SchedulerKind::Fifo, SchedulerKind::Pifo, SchedulerKind::Systolic] {
        let cfg = SchedulerConfig {
            kind,
            capacity_entries: 3,
            ..SchedulerConfig::default()
        };
        let mut q = build_scheduler(&cfg);
        assert_eq!(q.capacity(), 3);
        for s in 0..3 {
            q.push(e(10 - s, s)).unwrap();
            q.tick();
        }
        assert_eq!(q.push(e(0, 9)), Err(QueueFull));
        let first = q.pop().unwrap().seq;
        assert_eq!(first, if kind == SchedulerKind::Fifo { 0 } else { 2 });
    }
}

#[test]
fn systolic_single_swap() {
    let mut q = SystolicQueue::new(4, 16);
    q.push(e(9, 0)).unwrap();
    q.step();
    q.push(e(3, 1)).unwrap();
    q.step();
    assert_eq!(q.head().unwrap().rank, 3);
    assert_eq!(q.settle(), 0);

    // New entries enter at the head, so a larger one needs the swap.
    let mut q = SystolicQueue::new(4, 16);
    q.push(e(3, 0)).unwrap();
    q.step();
    q.push(e(9, 1)).unwrap();
    assert_eq!(q.step(), 1);
    assert_eq!(q.head().unwrap().rank, 3);
    assert!(q.is_quiescent());
}

#[test]
fn systolic_quiescent_step_is_noop() {
    let mut q = SystolicQueue::new(8, 16);
    for s in 0..5 {
        q.push(e(10 - s, s)).unwrap();
        q.settle();
    }
    let before = q.cells().to_vec();
    assert_eq!(q.step(), 0);
    assert_eq!(q.cells(), &before[..]);
}

#[test]
fn systolic_head_holds_minimum_after_one_step() {
    let mut r = rng(4);
    let mut q = SystolicQueue::new(64, 16);
    let mut live: Vec<RankedEntry> = Vec::new();
    for seq in 0..5000u64 {
        if live.len() < 64 && (live.is_empty() || r.random_bool(0.5)) {
            let x = e(r.random_range(0..32), seq);
            q.push(x).unwrap();
            live.push(x);
        } else {
            let got = q.pop().unwrap();
            let min = *live.iter().min().unwrap();
            assert_eq!(got, min);
            live.retain(|x| *x != min);
        }
        q.step();
        assert_eq!(q.head().copied(), live.iter().min().copied());
        // Occupied cells stay contiguous from the head.
        let occupied = q.cells().iter().take_while(|c| c.is_some()).count();
        assert_eq!(occupied, live.len());
    }
}

#[test]
fn systolic_settles_sorted() {
    let mut r = rng(6);
    let mut q = SystolicQueue::new(32, 16);
    for seq in 0..32 {
        q.push(e(r.random_range(0..8), seq)).unwrap();
        q.step();
    }
    q.settle();
    let keys: Vec<(u64, u64)> = q.cells().iter().flatten().map(|x| (x.rank, x.seq)).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
}

proptest! {
    #[test]
    fn systolic_equals_pifo(seed in any::<u64>(), cap in 1usize..48) {
        let mut r = rng(seed);
        let mut ops = random_script(&mut r, 600, 16);
        // Keep within capacity so both queues see the same script.
        let mut depth = 0usize;
        for op in ops.iter_mut() {
            match op {
                Some(_) if depth == cap => *op = None,
                Some(_) => depth += 1,
                None => depth = depth.saturating_sub(1),
            }
        }
        let mut s = SystolicQueue::new(cap, 16);
        let mut p = Pifo::new(cap, 16);
        prop_assert_eq!(drive(&mut s, &ops, true), drive(&mut p, &ops, false));
    }
}

#[test]
fn cam_primitive_lt_example() {
    let mut c = CamPrimitive::new(CamOp::Lt, 2, 16);
    c.write(0, 3);
    c.write(1, 8);
    assert_eq!(c.match_key(5).low_word(), 0b01);
    let mut g = CamPrimitive::new(CamOp::Gt, 2, 16);
    g.write(0, 3);
    g.write(1, 8);
    assert_eq!(g.match_key(5).low_word(), 0b10);
    let mut q = CamPrimitive::new(CamOp::Eq, 3, 16);
    q.write(0, 5);
    q.write(2, 5);
    assert_eq!(q.match_key(5).low_word(), 0b101);
    q.clear(2);
    assert_eq!(q.match_key(5).low_word(), 0b001);
}

#[test]
fn range_cam_examples() {
    let mut rc = RangeCam::new(4, 16);
    rc.set(1, 10, 20);
    assert_eq!(rc.lookup(15), vec![1]);
    assert_eq!(rc.lookup(10), vec![1]);
    assert_eq!(rc.lookup(20), vec![1]);
    assert!(rc.lookup(21).is_empty());
    assert!(rc.lookup(9).is_empty());
    rc.clear(1);
    assert!(rc.lookup(15).is_empty());
}

#[test]
fn range_cam_is_two_primitives() {
    let rc = RangeCam::new(1024, 16);
    let [lo, hi] = rc.primitives();
    assert_eq!((lo.op(), hi.op()), (CamOp::Gt, CamOp::Lt));
    assert_eq!(lo.key_bits() + hi.key_bits(), 32);
    assert_eq!(rc.bits(), 32_768);
}

#[test]
fn range_cam_matches_interval_oracle() {
    let mut r = rng(12);
    let mut rc = RangeCam::new(256, 16);
    let mut ranges = Vec::new();
    for i in 0..256 {
        let a: u64 = r.random_range(0..1 << 16);
        let b: u64 = r.random_range(0..1 << 16);
        let (lo, hi) = (a.min(b), a.max(b));
        rc.set(i, lo, hi);
        ranges.push((lo, hi));
    }
    for _ in 0..2000 {
        let k = r.random_range(0..1u64 << 16);
        let want: Vec<usize> = (0..256).filter(|i| ranges[*i].0 <= k && k <= ranges[*i].1).collect();
        assert_eq!(rc.lookup(k), want);
    }
}

#[test]
fn buffer_rtt_capacity() {
    let mut b = PacketBuffer::new(1_250_000);
    for i in 0..820 {
        assert!(matches!(
            b.admit(Packet::new(vec![0; 1518], i, 0)),
            Admission::Stored(_)
        ));
    }
    assert_eq!(b.occupancy(), 1_244_760);
    for i in 820..823 {
        assert!(matches!(
            b.admit(Packet::new(vec![0; 1518], i, 0)),
            Admission::Stored(_)
        ));
    }
    assert_eq!(b.admit(Packet::new(vec![0; 1518], 823, 0)), Admission::Dropped);
    assert_eq!(b.dropped(), 1);
    assert_eq!(b.len(), 823);
}

#[test]
fn buffer_round_trip() {
    let mut b = PacketBuffer::new(100);
    let pkt = Packet::new((0..60).collect(), 4, 2);
    let Admission::Stored(h) = b.admit(pkt.clone()) else {
        panic!("not stored")
    };
    assert_eq!(b.occupancy(), 60);
    assert_eq!(b.release(h).unwrap(), pkt);
    assert_eq!(b.occupancy(), 0);
    assert_eq!(b.high_water(), 60);
    assert_eq!(b.release(h), Err(BufferError::UnknownHandle(h)));
}

#[test]
fn zero_capacity_buffer_drops_everything() {
    let mut b = PacketBuffer::new(0);
    assert_eq!(b.admit(Packet::new(vec![1], 0, 0)), Admission::Dropped);
}

proptest! {
    #[test]
    fn buffer_occupancy_is_sum_of_stored(ops in proptest::collection::vec((any::<bool>(), 1usize..400), 1..200)) {
        let mut b = PacketBuffer::new(4000);
        let mut live = Vec::new();
        for (i, (admit, len)) in ops.into_iter().enumerate() {
            if admit || live.is_empty() {
                let pkt = Packet::new(vec![i as u8; len], i as u64, 0);
                let fits = b.occupancy() + len as u64 <= 4000;
                match b.admit(pkt.clone()) {
                    Admission::Stored(h) => { prop_assert!(fits); live.push((h, pkt)); }
                    Admission::Dropped => prop_assert!(!fits),
                }
            } else {
                let (h, pkt) = live.remove(i % live.len());
                prop_assert_eq!(b.release(h).unwrap(), pkt);
            }
            let sum: u64 = live.iter().map(|(_, p)| p.len() as u64).sum();
            prop_assert_eq!(b.occupancy(), sum);
            prop_assert_eq!(b.stored_bytes(), sum);
            prop_assert!(b.high_water() >= sum);
        }
    }
}

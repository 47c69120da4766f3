//! Packet scheduling: reference PIFO, a cycle-stepped systolic priority
//! queue, FIFO, CAM primitives and the packet buffer.

mod buffer;
mod cam;
mod systolic;

use std::collections::VecDeque;

pub use buffer::{Admission, BufferError, Handle, PacketBuffer};
pub use cam::{CamOp, CamPrimitive, MatchVector, RangeCam};
pub use systolic::SystolicQueue;

use crate::spec::{SchedulerConfig, SchedulerKind};

/// A queued packet reference. Ordering is by `(rank, seq)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankedEntry {
    pub rank: u64,
    pub seq: u64,
    pub pkt: u64,
}

impl RankedEntry {
    pub fn new(rank: u64, seq: u64, pkt: u64) -> Self {
        RankedEntry { rank, seq, pkt }
    }

    fn key(&self) -> (u64, u64) {
        (self.rank, self.seq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("queue full")]
pub struct QueueFull;

pub trait Scheduler {
    fn push(&mut self, e: RankedEntry) -> Result<(), QueueFull>;
    fn pop(&mut self) -> Option<RankedEntry>;
    fn len(&self) -> usize;
    fn capacity(&self) -> usize;
    /// Advances one clock between operations. Only cycle-level models care.
    fn tick(&mut self) {}

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_entry(rank_bits: usize, last_seq: &mut Option<u64>, e: &RankedEntry) {
    assert!(
        rank_bits >= 64 || e.rank >> rank_bits == 0,
        "rank {} exceeds {rank_bits} bits",
        e.rank
    );
    assert!(last_seq.is_none_or(|s| e.seq > s), "sequence numbers must increase");
    *last_seq = Some(e.seq);
}

/// Push-in first-out queue: each push lands at its `(rank, seq)` position,
/// pops take the head.
#[derive(Clone, Debug)]
pub struct Pifo {
    capacity: usize,
    rank_bits: usize,
    entries: VecDeque<RankedEntry>,
    last_seq: Option<u64>,
}

impl Pifo {
    pub fn new(capacity: usize, rank_bits: usize) -> Self {
        Pifo {
            capacity,
            rank_bits,
            entries: VecDeque::with_capacity(capacity),
            last_seq: None,
        }
    }

    pub fn peek(&self) -> Option<&RankedEntry> {
        self.entries.front()
    }
}

impl Scheduler for Pifo {
    fn push(&mut self, e: RankedEntry) -> Result<(), QueueFull> {
        if self.entries.len() >= self.capacity {
            return Err(QueueFull);
        }
        check_entry(self.rank_bits, &mut self.last_seq, &e);
        let at = self.entries.partition_point(|x| x.key() <= e.key());
        self.entries.insert(at, e);
        Ok(())
    }

    fn pop(&mut self) -> Option<RankedEntry> {
        self.entries.pop_front()
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Arrival-order queue; ranks are ignored.
#[derive(Clone, Debug)]
pub struct Fifo {
    capacity: usize,
    entries: VecDeque<RankedEntry>,
}

impl Fifo {
    pub fn new(capacity: usize) -> Self {
        Fifo {
            capacity,
            entries: VecDeque::new(),
        }
    }
}

impl Scheduler for Fifo {
    fn push(&mut self, e: RankedEntry) -> Result<(), QueueFull> {
        if self.entries.len() >= self.capacity {
            return Err(QueueFull);
        }
        self.entries.push_back(e);
        Ok(())
    }

    fn pop(&mut self) -> Option<RankedEntry> {
        self.entries.pop_front()
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn capacity(&self) -> usize {
        self.capacity
    }
}

pub fn build_scheduler(cfg: &SchedulerConfig) -> Box<dyn Scheduler + Send> {
    match cfg.kind {
        SchedulerKind::Fifo => Box::new(Fifo::new(cfg.capacity_entries)),
        SchedulerKind::Pifo => Box::new(Pifo::new(cfg.capacity_entries, cfg.rank_bits)),
        SchedulerKind::Systolic => Box::new(SystolicQueue::new(cfg.capacity_entries, cfg.rank_bits)),
    }
}

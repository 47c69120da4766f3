use super::{check_entry, QueueFull, RankedEntry, Scheduler};

/// Cycle-stepped systolic priority queue.
///
/// Cells form a line with the head at index 0 and empty cells acting as
/// `+inf`. A push shifts every cell right by one and enters at the head; a
/// pop takes the head and shifts every cell left. Each [`step`] is one wave
/// of parallel compare-swaps on adjacent pairs, alternating between even
/// pairs `(0,1), (2,3), ...` and odd pairs `(1,2), (3,4), ...`. Because the
/// shift moves every entry by one position, the wave phase restarts on the
/// even pairs after each push or pop.
///
/// Contract: one step after a push or pop the head holds the minimum
/// `(rank, seq)`, so with at least one step between operations the pop
/// sequence is the PIFO's.
///
/// [`step`]: SystolicQueue::step
#[derive(Clone, Debug)]
pub struct SystolicQueue {
    cells: Vec<Option<RankedEntry>>,
    odd_wave: bool,
    len: usize,
    rank_bits: usize,
    last_seq: Option<u64>,
    cycles: u64,
}

fn key(c: &Option<RankedEntry>) -> (u64, u64) {
    c.map_or((u64::MAX, u64::MAX), |e| (e.rank, e.seq))
}

impl SystolicQueue {
    pub fn new(capacity: usize, rank_bits: usize) -> Self {
        assert!(capacity >= 1);
        SystolicQueue {
            cells: vec![None; capacity],
            odd_wave: false,
            len: 0,
            rank_bits,
            last_seq: None,
            cycles: 0,
        }
    }

    pub fn cells(&self) -> &[Option<RankedEntry>] {
        &self.cells
    }

    pub fn head(&self) -> Option<&RankedEntry> {
        self.cells[0].as_ref()
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    /// One compare-swap wave. Returns the number of swaps.
    pub fn step(&mut self) -> usize {
        let start = self.odd_wave as usize;
        let mut swaps = 0;
        let n = self.cells.len();
        let mut i = start;
        while i + 1 < n {
            if key(&self.cells[i]) > key(&self.cells[i + 1]) {
                self.cells.swap(i, i + 1);
                swaps += 1;
            }
            i += 2;
        }
        self.odd_wave = !self.odd_wave;
        self.cycles += 1;
        swaps
    }

    /// No adjacent pair out of order, so further steps do nothing.
    pub fn is_quiescent(&self) -> bool {
        self.cells.windows(2).all(|w| key(&w[0]) <= key(&w[1]))
    }

    /// Steps until quiescent; returns the number of steps taken.
    pub fn settle(&mut self) -> usize {
        let mut steps = 0;
        while !self.is_quiescent() {
            self.step();
            steps += 1;
        }
        steps
    }
}

impl Scheduler for SystolicQueue {
    fn push(&mut self, e: RankedEntry) -> Result<(), QueueFull> {
        if self.len >= self.cells.len() {
            return Err(QueueFull);
        }
        check_entry(self.rank_bits, &mut self.last_seq, &e);
        // Occupied cells are contiguous from the head, so the tail is free.
        let tail = self.cells.pop();
        debug_assert_eq!(tail, Some(None));
        self.cells.insert(0, Some(e));
        self.len += 1;
        self.odd_wave = false;
        Ok(())
    }

    fn pop(&mut self) -> Option<RankedEntry> {
        let head = self.cells[0]?;
        self.cells.remove(0);
        self.cells.push(None);
        self.len -= 1;
        self.odd_wave = false;
        Some(head)
    }

    fn len(&self) -> usize {
        self.len
    }

    fn capacity(&self) -> usize {
        self.cells.len()
    }

    fn tick(&mut self) {
        self.step();
    }
}

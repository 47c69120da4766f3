use super::{check_width, ActionCall, TableError};
use crate::bits::Bits;

/// A value/mask rule. Mask bit 1 means the key bit must match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TernaryRule {
    pub value: Bits,
    pub mask: Bits,
    /// Larger wins.
    pub priority: u32,
    pub call: ActionCall,
}

impl TernaryRule {
    pub fn matches(&self, key: &Bits) -> bool {
        key.and(&self.mask) == self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Chunk {
    offset: usize,
    width: usize,
}

/// TCAM emulated with transposed memories.
///
/// The key is cut into `P = ceil(W / w)` chunks, most significant first. Each
/// chunk owns a memory of `2^w` words addressed by the chunk's key bits; word
/// `a` is an `N`-bit bitmap of the rule slots that accept address `a`. A
/// lookup ANDs the `P` addressed words and hands the surviving slots to a
/// priority encoder. When `w` does not divide `W` the last chunk is narrower
/// and only its low `2^(W mod w)` addresses are ever used, but it is still
/// allocated at full depth.
#[derive(Clone, Debug)]
pub struct TransposedTcam {
    key_width: usize,
    capacity: usize,
    chunk_width: usize,
    chunks: Vec<Chunk>,
    words_per_bitmap: usize,
    memory: Vec<u64>,
    slots: Vec<Option<TernaryRule>>,
    len: usize,
}

impl TransposedTcam {
    pub fn new(key_width: usize, capacity: usize, chunk_width: usize) -> Self {
        assert!(chunk_width >= 1 && chunk_width <= key_width && chunk_width <= 24);
        assert!(capacity >= 1);
        let chunks: Vec<Chunk> = (0..key_width)
            .step_by(chunk_width)
            .map(|offset| Chunk {
                offset,
                width: chunk_width.min(key_width - offset),
            })
            .collect();
        let words_per_bitmap = capacity.div_ceil(64);
        let memory = vec![0; chunks.len() * (1 << chunk_width) * words_per_bitmap];
        TransposedTcam {
            key_width,
            capacity,
            chunk_width,
            chunks,
            words_per_bitmap,
            memory,
            slots: vec![None; capacity],
            len: 0,
        }
    }

    pub fn key_width(&self) -> usize {
        self.key_width
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn chunk_width(&self) -> usize {
        self.chunk_width
    }

    /// Number of chunk memories.
    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Emulated memory size: `P × 2^w × N`.
    pub fn memory_bits(&self) -> u64 {
        (self.chunks.len() as u64) * (1u64 << self.chunk_width) * self.capacity as u64
    }

    /// `memory_bits / (N × W)`.
    pub fn overhead(&self) -> f64 {
        self.memory_bits() as f64 / (self.capacity as f64 * self.key_width as f64)
    }

    fn word_index(&self, chunk: usize, addr: usize) -> usize {
        ((chunk << self.chunk_width) + addr) * self.words_per_bitmap
    }

    /// The bitmap word at `addr` of chunk memory `chunk`.
    pub fn word(&self, chunk: usize, addr: usize) -> &[u64] {
        let i = self.word_index(chunk, addr);
        &self.memory[i..i + self.words_per_bitmap]
    }

    pub fn bit(&self, chunk: usize, addr: usize, slot: usize) -> bool {
        self.word(chunk, addr)[slot / 64] >> (slot % 64) & 1 == 1
    }

    pub fn rule(&self, slot: usize) -> Option<&TernaryRule> {
        self.slots.get(slot)?.as_ref()
    }

    pub fn rules(&self) -> impl Iterator<Item = (usize, &TernaryRule)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|r| (i, r)))
    }

    fn write_column(&mut self, slot: usize, rule: Option<&TernaryRule>) {
        let (word, bit) = (slot / 64, 1u64 << (slot % 64));
        for c in 0..self.chunks.len() {
            let Chunk { offset, width } = self.chunks[c];
            let care = rule.map(|r| {
                (
                    r.value.get_bits(offset, width) as usize,
                    r.mask.get_bits(offset, width) as usize,
                )
            });
            for addr in 0..1usize << self.chunk_width {
                let i = self.word_index(c, addr) + word;
                let set = match care {
                    Some((v, m)) => addr >> width == 0 && addr & m == v,
                    None => false,
                };
                if set {
                    self.memory[i] |= bit;
                } else {
                    self.memory[i] &= !bit;
                }
            }
        }
    }

    /// Stores the rule in the lowest free slot. `Ok(None)` means full.
    pub fn insert(&mut self, rule: TernaryRule) -> Result<Option<usize>, TableError> {
        check_width(self.key_width, &rule.value)?;
        check_width(self.key_width, &rule.mask)?;
        if !rule.value.and(&rule.mask.not()).is_zero() {
            return Err(TableError::DontCareBitsSet);
        }
        let Some(slot) = self.slots.iter().position(Option::is_none) else {
            return Ok(None);
        };
        self.write_column(slot, Some(&rule));
        self.slots[slot] = Some(rule);
        self.len += 1;
        Ok(Some(slot))
    }

    /// Clears the slot's bit in every word of every chunk memory.
    pub fn remove(&mut self, slot: usize) -> Option<TernaryRule> {
        let rule = self.slots.get_mut(slot)?.take()?;
        self.write_column(slot, None);
        self.len -= 1;
        Some(rule)
    }

    /// Highest-priority matching slot; ties go to the lowest slot.
    pub fn lookup(&self, key: &Bits) -> Option<(usize, &TernaryRule)> {
        if key.width() != self.key_width {
            return None;
        }
        let mut acc: Vec<u64> = vec![u64::MAX; self.words_per_bitmap];
        for (c, chunk) in self.chunks.iter().enumerate() {
            let addr = key.get_bits(chunk.offset, chunk.width) as usize;
            for (a, w) in acc.iter_mut().zip(self.word(c, addr)) {
                *a &= w;
            }
        }
        let mut best: Option<(usize, &TernaryRule)> = None;
        for (wi, mut bits) in acc.into_iter().enumerate() {
            while bits != 0 {
                let slot = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let rule = self.slots[slot].as_ref().expect("set bit has a rule");
                if best.is_none_or(|(_, b)| rule.priority > b.priority) {
                    best = Some((slot, rule));
                }
            }
        }
        best
    }
}

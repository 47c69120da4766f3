use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_width, ActionCall, InsertOutcome, TableError};
use crate::bits::Bits;

pub const BUCKET_SLOTS: usize = 4;
/// Evictions tried before an insert reports `Full`.
pub const KICK_BUDGET: usize = 500;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactEntry {
    pub key: Bits,
    pub call: ActionCall,
}

type Bucket = [Option<ExactEntry>; BUCKET_SLOTS];

/// Two-choice cuckoo hash table with 4-slot buckets and random-walk eviction.
#[derive(Clone, Debug)]
pub struct CuckooTable {
    key_width: usize,
    capacity: usize,
    buckets: Vec<Bucket>,
    seeds: [u64; 2],
    rng: ChaCha8Rng,
    len: usize,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_key(seed: u64, key: &Bits) -> u64 {
    let mut h = mix64(seed ^ key.width() as u64);
    for chunk in key.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        h = mix64(h ^ u64::from_be_bytes(word));
    }
    h
}

impl CuckooTable {
    pub fn new(key_width: usize, capacity: usize) -> Self {
        Self::with_seed(key_width, capacity, 0)
    }

    pub fn with_seed(key_width: usize, capacity: usize, seed: u64) -> Self {
        let nbuckets = capacity.div_ceil(BUCKET_SLOTS).max(1);
        CuckooTable {
            key_width,
            capacity,
            buckets: vec![Default::default(); nbuckets],
            seeds: [mix64(seed ^ 0x9e37_79b9_7f4a_7c15), mix64(seed ^ 0x6a09_e667_f3bc_c908)],
            rng: ChaCha8Rng::seed_from_u64(seed),
            len: 0,
        }
    }

    pub fn key_width(&self) -> usize {
        self.key_width
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn load_factor(&self) -> f64 {
        self.len as f64 / self.capacity as f64
    }

    fn candidates(&self, key: &Bits) -> [usize; 2] {
        let n = self.buckets.len() as u64;
        [
            (hash_key(self.seeds[0], key) % n) as usize,
            (hash_key(self.seeds[1], key) % n) as usize,
        ]
    }

    fn find(&self, key: &Bits) -> Option<(usize, usize)> {
        self.candidates(key).into_iter().find_map(|b| {
            self.buckets[b]
                .iter()
                .position(|s| s.as_ref().is_some_and(|e| e.key == *key))
                .map(|s| (b, s))
        })
    }

    fn free_slot(&self, b: usize) -> Option<usize> {
        self.buckets[b].iter().position(Option::is_none)
    }

    /// Inserts or replaces. On `Full` the table is left exactly as it was.
    pub fn insert(&mut self, entry: ExactEntry) -> Result<InsertOutcome, TableError> {
        check_width(self.key_width, &entry.key)?;
        if let Some((b, s)) = self.find(&entry.key) {
            self.buckets[b][s] = Some(entry);
            return Ok(InsertOutcome::Replaced);
        }
        if self.len >= self.capacity {
            return Ok(InsertOutcome::Full);
        }
        let [b1, b2] = self.candidates(&entry.key);
        for b in [b1, b2] {
            if let Some(s) = self.free_slot(b) {
                self.buckets[b][s] = Some(entry);
                self.len += 1;
                return Ok(InsertOutcome::Inserted);
            }
        }

        let mut homeless = entry;
        let mut bucket = if self.rng.random::<bool>() { b1 } else { b2 };
        let mut path = Vec::with_capacity(KICK_BUDGET);
        for _ in 0..KICK_BUDGET {
            let slot = self.rng.random_range(0..BUCKET_SLOTS);
            let evicted = self.buckets[bucket][slot].replace(homeless).expect("bucket is full");
            path.push((bucket, slot));
            let [c1, c2] = self.candidates(&evicted.key);
            let alt = if c1 == bucket { c2 } else { c1 };
            if let Some(s) = self.free_slot(alt) {
                self.buckets[alt][s] = Some(evicted);
                self.len += 1;
                return Ok(InsertOutcome::Inserted);
            }
            homeless = evicted;
            bucket = alt;
        }
        // Walk the eviction chain backwards so nothing already stored is lost.
        for (b, s) in path.into_iter().rev() {
            homeless = self.buckets[b][s].replace(homeless).expect("path slot occupied");
        }
        debug_assert_eq!(homeless.key.width(), self.key_width);
        Ok(InsertOutcome::Full)
    }

    pub fn lookup(&self, key: &Bits) -> Option<&ActionCall> {
        self.lookup_counting(key).0
    }

    /// Lookup that also reports how many buckets were read.
    pub fn lookup_counting(&self, key: &Bits) -> (Option<&ActionCall>, usize) {
        if key.width() != self.key_width {
            return (None, 0);
        }
        let mut probes = 0;
        for b in self.candidates(key) {
            probes += 1;
            if let Some(e) = self.buckets[b].iter().flatten().find(|e| e.key == *key) {
                return (Some(&e.call), probes);
            }
        }
        (None, probes)
    }

    pub fn remove(&mut self, key: &Bits) -> Option<ActionCall> {
        let (b, s) = self.find(key)?;
        self.len -= 1;
        self.buckets[b][s].take().map(|e| e.call)
    }

    pub fn entries(&self) -> impl Iterator<Item = &ExactEntry> {
        self.buckets.iter().flatten().flatten()
    }
}

/// Comparison a CAM primitive applies as `stored op key`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CamOp {
    Eq,
    Lt,
    Gt,
}

/// One bit per CAM entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchVector {
    len: usize,
    words: Vec<u64>,
}

impl MatchVector {
    pub fn zeros(len: usize) -> Self {
        MatchVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn and(&self, other: &MatchVector) -> MatchVector {
        self.zip(other, |a, b| a & b)
    }

    pub fn not(&self) -> MatchVector {
        let mut v = MatchVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        if !self.len.is_multiple_of(64) {
            let last = v.words.len() - 1;
            v.words[last] &= (1u64 << (self.len % 64)) - 1;
        }
        v
    }

    fn zip(&self, other: &MatchVector, f: impl Fn(u64, u64) -> u64) -> MatchVector {
        assert_eq!(self.len, other.len);
        MatchVector {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|i| self.get(*i)).collect()
    }

    /// Low 64 entries as an integer, entry 0 in bit 0.
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

/// A CAM of `entries` words of `key_bits` bits answering one comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CamPrimitive {
    op: CamOp,
    key_bits: u32,
    entries: Vec<Option<u64>>,
}

impl CamPrimitive {
    pub fn new(op: CamOp, entries: usize, key_bits: u32) -> Self {
        assert!((1..=64).contains(&key_bits));
        CamPrimitive {
            op,
            key_bits,
            entries: vec![None; entries],
        }
    }

    pub fn op(&self) -> CamOp {
        self.op
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    fn fits(&self, v: u64) -> bool {
        self.key_bits == 64 || v >> self.key_bits == 0
    }

    pub fn write(&mut self, index: usize, value: u64) {
        assert!(self.fits(value), "value wider than {} bits", self.key_bits);
        self.entries[index] = Some(value);
    }

    pub fn clear(&mut self, index: usize) {
        self.entries[index] = None;
    }

    pub fn occupancy(&self) -> MatchVector {
        let mut v = MatchVector::zeros(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            if e.is_some() {
                v.set(i);
            }
        }
        v
    }

    /// Bit `i` is set iff entry `i` is occupied and `stored op key` holds.
    pub fn match_key(&self, key: u64) -> MatchVector {
        assert!(self.fits(key), "key wider than {} bits", self.key_bits);
        let mut v = MatchVector::zeros(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let Some(s) = *e else { continue };
            let hit = match self.op {
                CamOp::Eq => s == key,
                CamOp::Lt => s < key,
                CamOp::Gt => s > key,
            };
            if hit {
                v.set(i);
            }
        }
        v
    }
}

/// Range-search CAM built from a `>` primitive holding the low bounds and a
/// `<` primitive holding the high bounds. Entry `i` matches when neither
/// `lo_i > key` nor `hi_i < key` fires, masked by occupancy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeCam {
    lo: CamPrimitive,
    hi: CamPrimitive,
}

impl RangeCam {
    pub fn new(entries: usize, key_bits: u32) -> Self {
        RangeCam {
            lo: CamPrimitive::new(CamOp::Gt, entries, key_bits),
            hi: CamPrimitive::new(CamOp::Lt, entries, key_bits),
        }
    }

    pub fn primitives(&self) -> [&CamPrimitive; 2] {
        [&self.lo, &self.hi]
    }

    pub fn depth(&self) -> usize {
        self.lo.depth()
    }

    /// Storage in bits: two bounds per entry.
    pub fn bits(&self) -> u64 {
        self.depth() as u64 * self.lo.key_bits() as u64 * 2
    }

    pub fn set(&mut self, index: usize, lo: u64, hi: u64) {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        self.lo.write(index, lo);
        self.hi.write(index, hi);
    }

    pub fn clear(&mut self, index: usize) {
        self.lo.clear(index);
        self.hi.clear(index);
    }

    pub fn match_key(&self, key: u64) -> MatchVector {
        let above_lo = self.lo.match_key(key).not();
        let below_hi = self.hi.match_key(key).not();
        above_lo.and(&below_hi).and(&self.lo.occupancy())
    }

    pub fn lookup(&self, key: u64) -> Vec<usize> {
        self.match_key(key).ones()
    }
}

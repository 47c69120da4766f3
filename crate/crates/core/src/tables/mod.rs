//! Match tables: cuckoo-hashed exact match, transposed-memory ternary match
//! and binary-trie longest prefix match, plus linear-scan oracles.

mod exact;
mod lpm;
pub mod oracle;
pub mod population;
mod ternary;

use thiserror::Error;

use crate::bits::Bits;
use crate::spec::{MatchKind, TableDecl};

pub use exact::{CuckooTable, ExactEntry, BUCKET_SLOTS, KICK_BUDGET};
pub use lpm::{LpmTrie, Prefix};
pub use ternary::{TernaryRule, TransposedTcam};

/// The action bound to a table entry and its action data.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActionCall {
    pub action: String,
    pub data: Bits,
}

impl ActionCall {
    pub fn new(action: &str, data: Bits) -> Self {
        ActionCall {
            action: action.to_string(),
            data,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted,
    Replaced,
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("key width {got} does not match table width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("ternary value has bits set outside its mask")]
    DontCareBitsSet,
    #[error("prefix length {length} exceeds width {width}")]
    PrefixTooLong { length: usize, width: usize },
    #[error("prefix has bits set beyond its length")]
    PrefixBitsBeyondLength,
    #[error("entry kind {got} does not fit a {expected} table")]
    KindMismatch { expected: MatchKind, got: MatchKind },
}

pub(crate) fn check_width(expected: usize, got: &Bits) -> Result<(), TableError> {
    if got.width() == expected {
        Ok(())
    } else {
        Err(TableError::WidthMismatch {
            expected,
            got: got.width(),
        })
    }
}

/// One table entry of any kind, as read from a population file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableEntry {
    Exact(ExactEntry),
    Ternary(TernaryRule),
    Lpm(Prefix, ActionCall),
}

impl TableEntry {
    pub fn kind(&self) -> MatchKind {
        match self {
            TableEntry::Exact(_) => MatchKind::Exact,
            TableEntry::Ternary(_) => MatchKind::Ternary,
            TableEntry::Lpm(..) => MatchKind::Lpm,
        }
    }
}

/// A table of any kind behind one lookup interface.
// One per stage, so the size gap between variants costs nothing worth boxing.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug)]
pub enum MatchTable {
    Exact(CuckooTable),
    Ternary(TransposedTcam),
    Lpm(LpmTrie),
}

impl MatchTable {
    pub fn for_decl(decl: &TableDecl, seed: u64) -> Self {
        match decl.kind {
            MatchKind::Exact => MatchTable::Exact(CuckooTable::with_seed(decl.key_width, decl.capacity, seed)),
            MatchKind::Ternary => MatchTable::Ternary(TransposedTcam::new(
                decl.key_width,
                decl.capacity,
                decl.chunk_width.expect("validated ternary table"),
            )),
            MatchKind::Lpm => MatchTable::Lpm(LpmTrie::new(decl.key_width, decl.capacity)),
        }
    }

    pub fn kind(&self) -> MatchKind {
        match self {
            MatchTable::Exact(_) => MatchKind::Exact,
            MatchTable::Ternary(_) => MatchKind::Ternary,
            MatchTable::Lpm(_) => MatchKind::Lpm,
        }
    }

    pub fn insert(&mut self, entry: TableEntry) -> Result<InsertOutcome, TableError> {
        match (self, entry) {
            (MatchTable::Exact(t), TableEntry::Exact(e)) => t.insert(e),
            (MatchTable::Ternary(t), TableEntry::Ternary(r)) => {
                Ok(t.insert(r)?.map_or(InsertOutcome::Full, |_| InsertOutcome::Inserted))
            }
            (MatchTable::Lpm(t), TableEntry::Lpm(p, call)) => t.insert(p, call),
            (t, e) => Err(TableError::KindMismatch {
                expected: t.kind(),
                got: e.kind(),
            }),
        }
    }

    pub fn lookup(&self, key: &Bits) -> Option<&ActionCall> {
        match self {
            MatchTable::Exact(t) => t.lookup(key),
            MatchTable::Ternary(t) => t.lookup(key).map(|(_, r)| &r.call),
            MatchTable::Lpm(t) => t.lookup(key).map(|(_, c)| c),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            MatchTable::Exact(t) => t.len(),
            MatchTable::Ternary(t) => t.len(),
            MatchTable::Lpm(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

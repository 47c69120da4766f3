//! Linear-scan reference lookups. These apply the match definitions directly
//! and share no code with the emulated tables.

use super::{ActionCall, Prefix, TernaryRule};
use crate::bits::Bits;

/// Highest priority rule whose cared-for bits equal the key's; ties go to
/// the lowest index. Indices are positions in `rules`.
pub fn oracle_ternary<'a>(rules: &'a [Option<TernaryRule>], key: &Bits) -> Option<(usize, &'a TernaryRule)> {
    let mut best: Option<(usize, &TernaryRule)> = None;
    for (i, r) in rules.iter().enumerate() {
        let Some(r) = r else { continue };
        let hit = (0..key.width()).all(|b| !r.mask.bit(b) || key.bit(b) == r.value.bit(b));
        if hit && best.is_none_or(|(_, b)| r.priority > b.priority) {
            best = Some((i, r));
        }
    }
    best
}

/// Longest prefix whose leading bits equal the key's.
pub fn oracle_lpm<'a>(prefixes: &'a [(Prefix, ActionCall)], key: &Bits) -> Option<(&'a Prefix, &'a ActionCall)> {
    let mut best: Option<&(Prefix, ActionCall)> = None;
    for e in prefixes {
        let p = &e.0;
        let hit = (0..p.length).all(|b| key.bit(b) == p.bits.bit(b));
        if hit && best.is_none_or(|b| p.length > b.0.length) {
            best = Some(e);
        }
    }
    best.map(|(p, c)| (p, c))
}

use super::{check_width, ActionCall, InsertOutcome, TableError};
use crate::bits::Bits;

/// The top `length` bits of `bits`; everything below must be zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prefix {
    pub bits: Bits,
    pub length: usize,
}

impl Prefix {
    pub fn new(bits: Bits, length: usize) -> Result<Self, TableError> {
        if length > bits.width() {
            return Err(TableError::PrefixTooLong {
                length,
                width: bits.width(),
            });
        }
        if (length..bits.width()).any(|i| bits.bit(i)) {
            return Err(TableError::PrefixBitsBeyondLength);
        }
        Ok(Prefix { bits, length })
    }

    pub fn width(&self) -> usize {
        self.bits.width()
    }

    pub fn contains(&self, key: &Bits) -> bool {
        (0..self.length).all(|i| key.bit(i) == self.bits.bit(i))
    }
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    child: [u32; 2],
    entry: Option<(Prefix, ActionCall)>,
}

impl Node {
    fn empty() -> Self {
        Node {
            child: [NONE; 2],
            entry: None,
        }
    }
}

/// Unibit binary trie. A prefix of length `l` lives at depth `l`.
#[derive(Clone, Debug)]
pub struct LpmTrie {
    width: usize,
    capacity: usize,
    nodes: Vec<Node>,
    free: Vec<u32>,
    len: usize,
}

impl LpmTrie {
    pub fn new(width: usize, capacity: usize) -> Self {
        LpmTrie {
            width,
            capacity,
            nodes: vec![Node::empty()],
            free: Vec::new(),
            len: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
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

    /// Live nodes, root included.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    fn alloc(&mut self) -> u32 {
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = Node::empty();
                i
            }
            None => {
                self.nodes.push(Node::empty());
                (self.nodes.len() - 1) as u32
            }
        }
    }

    /// Stores or replaces the prefix. Walks `length` nodes. A new prefix
    /// beyond `capacity` is refused with `Full`.
    pub fn insert(&mut self, prefix: Prefix, call: ActionCall) -> Result<InsertOutcome, TableError> {
        check_width(self.width, &prefix.bits)?;
        let mut at = 0usize;
        for i in 0..prefix.length {
            let b = prefix.bits.bit(i) as usize;
            let next = self.nodes[at].child[b];
            at = if next == NONE {
                let n = self.alloc();
                self.nodes[at].child[b] = n;
                n as usize
            } else {
                next as usize
            };
        }
        let outcome = if self.nodes[at].entry.is_some() {
            InsertOutcome::Replaced
        } else if self.len >= self.capacity {
            self.prune_path(&prefix);
            return Ok(InsertOutcome::Full);
        } else {
            self.len += 1;
            InsertOutcome::Inserted
        };
        self.nodes[at].entry = Some((prefix, call));
        Ok(outcome)
    }

    pub fn lookup(&self, key: &Bits) -> Option<(&Prefix, &ActionCall)> {
        if key.width() != self.width {
            return None;
        }
        let mut at = 0usize;
        let mut best = self.nodes[0].entry.as_ref();
        for i in 0..self.width {
            let next = self.nodes[at].child[key.bit(i) as usize];
            if next == NONE {
                break;
            }
            at = next as usize;
            if let Some(e) = &self.nodes[at].entry {
                best = Some(e);
            }
        }
        best.map(|(p, c)| (p, c))
    }

    /// Removes an exact prefix and prunes nodes left without entries or
    /// children.
    pub fn remove(&mut self, prefix: &Prefix) -> Option<ActionCall> {
        if prefix.width() != self.width {
            return None;
        }
        let mut at = 0usize;
        for i in 0..prefix.length {
            let next = self.nodes[at].child[prefix.bits.bit(i) as usize];
            if next == NONE {
                return None;
            }
            at = next as usize;
        }
        let (_, call) = self.nodes[at].entry.take()?;
        self.len -= 1;
        self.prune_path(prefix);
        Some(call)
    }

    fn prune_path(&mut self, prefix: &Prefix) {
        let mut path = vec![0usize];
        for i in 0..prefix.length {
            let next = self.nodes[*path.last().unwrap()].child[prefix.bits.bit(i) as usize];
            if next == NONE {
                break;
            }
            path.push(next as usize);
        }
        while path.len() > 1 {
            let n = *path.last().unwrap();
            let node = &self.nodes[n];
            if node.entry.is_some() || node.child != [NONE; 2] {
                break;
            }
            path.pop();
            let parent = *path.last().unwrap();
            let b = prefix.bits.bit(path.len() - 1) as usize;
            self.nodes[parent].child[b] = NONE;
            self.free.push(n as u32);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Prefix, &ActionCall)> {
        let free: std::collections::HashSet<u32> = self.free.iter().copied().collect();
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(i, _)| !free.contains(&(*i as u32)))
            .filter_map(|(_, n)| n.entry.as_ref().map(|(p, c)| (p, c)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v4(a: u8, b: u8, c: u8, d: u8) -> Bits {
        Bits::from_bytes(&[a, b, c, d])
    }

    fn call(d: u128) -> ActionCall {
        ActionCall::new("route", Bits::from_u128(8, d))
    }

    #[test]
    fn default_route_at_root() {
        let mut t = LpmTrie::new(32, 16);
        let p = Prefix::new(v4(0, 0, 0, 0), 0).unwrap();
        assert_eq!(t.insert(p, call(1)).unwrap(), InsertOutcome::Inserted);
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.lookup(&v4(1, 2, 3, 4)).unwrap().0.length, 0);
    }

    #[test]
    fn replace_same_prefix() {
        let mut t = LpmTrie::new(32, 16);
        let p = Prefix::new(v4(10, 0, 0, 0), 8).unwrap();
        t.insert(p.clone(), call(1)).unwrap();
        assert_eq!(t.insert(p, call(2)).unwrap(), InsertOutcome::Replaced);
        assert_eq!(t.lookup(&v4(10, 9, 9, 9)).unwrap().1.data.to_u128(), 2);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn longest_wins() {
        let mut t = LpmTrie::new(32, 16);
        t.insert(Prefix::new(v4(10, 0, 0, 0), 8).unwrap(), call(8)).unwrap();
        t.insert(Prefix::new(v4(10, 1, 0, 0), 16).unwrap(), call(16)).unwrap();
        assert_eq!(t.lookup(&v4(10, 1, 2, 3)).unwrap().0.length, 16);
        assert_eq!(t.lookup(&v4(10, 2, 2, 3)).unwrap().0.length, 8);
        assert!(t.lookup(&v4(11, 0, 0, 0)).is_none());
    }

    #[test]
    fn prefix_invariants() {
        assert_eq!(Prefix::new(v4(10, 0, 0, 1), 8), Err(TableError::PrefixBitsBeyondLength));
        assert!(matches!(
            Prefix::new(v4(0, 0, 0, 0), 33),
            Err(TableError::PrefixTooLong { .. })
        ));
    }

    #[test]
    fn remove_prunes() {
        let mut t = LpmTrie::new(32, 16);
        let a = Prefix::new(v4(10, 0, 0, 0), 8).unwrap();
        let b = Prefix::new(v4(10, 128, 0, 0), 9).unwrap();
        t.insert(a.clone(), call(1)).unwrap();
        t.insert(b.clone(), call(2)).unwrap();
        assert_eq!(t.node_count(), 10);
        t.remove(&b).unwrap();
        assert_eq!(t.node_count(), 9);
        assert!(t.lookup(&v4(10, 128, 0, 0)).unwrap().0.length == 8);
        t.remove(&a).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(t.lookup(&v4(10, 0, 0, 0)).is_none());
        assert!(t.remove(&a).is_none());
    }

    #[test]
    fn capacity_refuses_new_prefixes() {
        let mut t = LpmTrie::new(8, 1);
        t.insert(Prefix::new(Bits::from_u128(8, 0x80), 1).unwrap(), call(1))
            .unwrap();
        let p = Prefix::new(Bits::from_u128(8, 0x40), 2).unwrap();
        assert_eq!(t.insert(p, call(2)).unwrap(), InsertOutcome::Full);
        assert_eq!(t.node_count(), 2);
        let again = Prefix::new(Bits::from_u128(8, 0x80), 1).unwrap();
        assert_eq!(t.insert(again, call(3)).unwrap(), InsertOutcome::Replaced);
    }
}

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use thiserror::Error;

use crate::packet::Packet;

pub type Handle = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Stored(Handle),
    Dropped,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BufferError {
    #[error("release of unknown buffer handle {0}")]
    UnknownHandle(Handle),
    #[error("packet under handle {0} changed while buffered")]
    Corrupted(Handle),
}

fn digest(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

/// Byte-accounted packet store.
#[derive(Clone, Debug)]
pub struct PacketBuffer {
    capacity_bytes: u64,
    occupancy: u64,
    high_water: u64,
    dropped: u64,
    next: Handle,
    stored: HashMap<Handle, (Packet, u64)>,
}

impl PacketBuffer {
    pub fn new(capacity_bytes: u64) -> Self {
        PacketBuffer {
            capacity_bytes,
            occupancy: 0,
            high_water: 0,
            dropped: 0,
            next: 0,
            stored: HashMap::new(),
        }
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn high_water(&self) -> u64 {
        self.high_water
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn len(&self) -> usize {
        self.stored.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stored.is_empty()
    }

    /// Stores the packet if it fits in the remaining space.
    pub fn admit(&mut self, pkt: Packet) -> Admission {
        let len = pkt.bytes.len() as u64;
        if self.occupancy + len > self.capacity_bytes {
            self.dropped += 1;
            return Admission::Dropped;
        }
        let h = self.next;
        self.next += 1;
        self.occupancy += len;
        self.high_water = self.high_water.max(self.occupancy);
        let d = digest(&pkt.bytes);
        self.stored.insert(h, (pkt, d));
        Admission::Stored(h)
    }

    pub fn release(&mut self, handle: Handle) -> Result<Packet, BufferError> {
        let (pkt, d) = self.stored.remove(&handle).ok_or(BufferError::UnknownHandle(handle))?;
        self.occupancy -= pkt.bytes.len() as u64;
        if digest(&pkt.bytes) != d {
            return Err(BufferError::Corrupted(handle));
        }
        Ok(pkt)
    }

    /// Sum of stored packet lengths, recomputed from the contents.
    pub fn stored_bytes(&self) -> u64 {
        self.stored.values().map(|(p, _)| p.bytes.len() as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(len: usize, seq: u64) -> Packet {
        Packet::new((0..len).map(|i| (i + seq as usize) as u8).collect(), seq, 0)
    }

    #[test]
    fn fills_to_capacity() {
        let mut b = PacketBuffer::new(1_250_000);
        for i in 0..820 {
            assert!(matches!(b.admit(pkt(1518, i)), Admission::Stored(_)));
        }
        assert_eq!(b.occupancy(), 1_244_760);
        for i in 820..823 {
            assert!(matches!(b.admit(pkt(1518, i)), Admission::Stored(_)));
        }
        assert_eq!(b.admit(pkt(1518, 823)), Admission::Dropped);
        assert_eq!(b.occupancy(), 823 * 1518);
        assert_eq!(b.dropped(), 1);
    }

    #[test]
    fn round_trip() {
        let mut b = PacketBuffer::new(100);
        let p = pkt(60, 7);
        let Admission::Stored(h) = b.admit(p.clone()) else {
            panic!()
        };
        assert_eq!(b.release(h).unwrap(), p);
        assert_eq!(b.occupancy(), 0);
        assert_eq!(b.high_water(), 60);
        assert_eq!(b.release(h), Err(BufferError::UnknownHandle(h)));
    }

    #[test]
    fn zero_capacity_drops_everything() {
        let mut b = PacketBuffer::new(0);
        assert_eq!(b.admit(pkt(1, 0)), Admission::Dropped);
        assert_eq!(b.admit(pkt(64, 1)), Admission::Dropped);
        assert!(b.is_empty());
    }
}

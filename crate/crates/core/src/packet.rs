//! Packets and their parsed representation.

use crate::bits::Bits;
use crate::spec::{FieldRef, PipelineSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub bytes: Vec<u8>,
    pub arrival_seq: u64,
    pub ingress_port: u16,
}

impl Packet {
    pub fn new(bytes: Vec<u8>, arrival_seq: u64, ingress_port: u16) -> Self {
        Packet {
            bytes,
            arrival_seq,
            ingress_port,
        }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Header names and widths in index order, metadata last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub names: Vec<String>,
    pub widths: Vec<usize>,
}

impl Layout {
    pub fn new(spec: &PipelineSpec) -> Self {
        let all = spec.all_headers();
        Layout {
            names: all.iter().map(|h| h.name.clone()).collect(),
            widths: all.iter().map(|h| h.total_bits()).collect(),
        }
    }

    pub fn meta(&self) -> usize {
        self.names.len() - 1
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Extracted header instances with their validity, the metadata
/// pseudo-header and the unparsed payload of one packet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPacket {
    /// One value per header in [`Layout`] order; invalid headers keep
    /// whatever they last held (zero if never extracted).
    pub headers: Vec<Bits>,
    pub valid: Vec<bool>,
    pub payload: Vec<u8>,
    pub arrival_seq: u64,
    pub ingress_port: u16,
}

impl ParsedPacket {
    /// All headers invalid and zeroed, metadata valid and zeroed.
    pub fn empty(layout: &Layout, arrival_seq: u64, ingress_port: u16) -> Self {
        let mut valid = vec![false; layout.names.len()];
        valid[layout.meta()] = true;
        ParsedPacket {
            headers: layout.widths.iter().map(|w| Bits::zero(*w)).collect(),
            valid,
            payload: Vec::new(),
            arrival_seq,
            ingress_port,
        }
    }

    pub fn read(&self, f: FieldRef) -> u128 {
        self.headers[f.header].get_bits(f.offset, f.width)
    }

    pub fn write(&mut self, f: FieldRef, value: u128) {
        self.headers[f.header].set_bits(f.offset, f.width, value);
    }

    pub fn is_valid(&self, header: usize) -> bool {
        self.valid[header]
    }

    /// Names of valid headers in layout order (metadata excluded).
    pub fn valid_names<'a>(&self, layout: &'a Layout) -> Vec<&'a str> {
        (0..layout.meta())
            .filter(|i| self.valid[*i])
            .map(|i| layout.names[i].as_str())
            .collect()
    }
}

//! Packet reassembly from valid headers in emission order.

use crate::packet::{Layout, ParsedPacket};
use crate::spec::PipelineSpec;

/// Header indices in emission order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeparseSequence(pub Vec<usize>);

impl DeparseSequence {
    pub fn compile(spec: &PipelineSpec) -> Self {
        DeparseSequence(
            spec.deparser
                .iter()
                .map(|h| spec.header_index(h).expect("validated deparser header"))
                .collect(),
        )
    }

    pub fn from_names(layout: &Layout, names: &[&str]) -> Option<Self> {
        names
            .iter()
            .map(|n| layout.index(n))
            .collect::<Option<_>>()
            .map(DeparseSequence)
    }
}

/// Emits every valid header of the sequence, in sequence order, followed by
/// the payload.
pub fn deparse(pp: &ParsedPacket, sequence: &DeparseSequence) -> Vec<u8> {
    let len: usize = sequence
        .0
        .iter()
        .filter(|h| pp.valid[**h])
        .map(|h| pp.headers[*h].as_bytes().len())
        .sum::<usize>()
        + pp.payload.len();
    let mut out = Vec::with_capacity(len);
    for &h in &sequence.0 {
        if pp.valid[h] {
            out.extend_from_slice(pp.headers[h].as_bytes());
        }
    }
    out.extend_from_slice(&pp.payload);
    out
}

//! Parse-graph execution over packet bytes.

use std::collections::HashMap;

use thiserror::Error;

use crate::bits::Bits;
use crate::packet::{Layout, Packet, ParsedPacket};
use crate::spec::{FieldRef, PipelineSpec, ACCEPT, META};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("truncated at {header}: need {needed} bytes, {available} left")]
    Truncated {
        header: String,
        needed: usize,
        available: usize,
    },
    #[error("no transition from {header} for selector value {value:#x}")]
    NoTransition { header: String, value: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Next {
    Accept,
    Node(usize),
}

#[derive(Clone, Debug)]
struct Node {
    header: usize,
    bytes: usize,
    select: Option<(usize, usize)>,
    edges: HashMap<u128, Next>,
    default: Option<Next>,
}

/// A parse graph bound to header indices.
#[derive(Clone, Debug)]
pub struct ParserProgram {
    layout: Layout,
    nodes: Vec<Node>,
    start: usize,
    meta_ingress: FieldRef,
}

impl ParserProgram {
    /// Compiles a validated spec's parse graph.
    pub fn compile(spec: &PipelineSpec) -> Self {
        let layout = Layout::new(spec);
        let g = &spec.parser;
        let node_index = |name: &str| g.nodes.iter().position(|n| n.header == name);
        let target = |name: &str| {
            if name == ACCEPT {
                Next::Accept
            } else {
                Next::Node(node_index(name).expect("validated target"))
            }
        };
        let nodes = g
            .nodes
            .iter()
            .map(|n| {
                let h = spec.header(&n.header).expect("validated header");
                Node {
                    header: spec.header_index(&n.header).unwrap(),
                    bytes: h.byte_len(),
                    select: n.select.as_ref().map(|f| h.field(f).expect("validated selector")),
                    edges: n.transitions.iter().map(|t| (t.value.0, target(&t.next))).collect(),
                    default: n.default.as_deref().map(target),
                }
            })
            .collect();
        ParserProgram {
            layout,
            nodes,
            start: node_index(&g.start).expect("validated start"),
            meta_ingress: spec.resolve_field(&format!("{META}.ingress_port")).unwrap(),
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Walks the parse graph from the start node, extracting one header per
/// visited node. The remaining bytes become the payload.
pub fn parse(pkt: &Packet, prog: &ParserProgram) -> Result<ParsedPacket, ParseError> {
    let mut pp = ParsedPacket::empty(&prog.layout, pkt.arrival_seq, pkt.ingress_port);
    pp.write(prog.meta_ingress, pkt.ingress_port as u128);
    let mut cursor = 0;
    let mut at = Next::Node(prog.start);
    while let Next::Node(i) = at {
        let node = &prog.nodes[i];
        let available = pkt.bytes.len() - cursor;
        if available < node.bytes {
            return Err(ParseError::Truncated {
                header: prog.layout.names[node.header].clone(),
                needed: node.bytes,
                available,
            });
        }
        let value = Bits::from_bytes(&pkt.bytes[cursor..cursor + node.bytes]);
        cursor += node.bytes;
        let selected = node.select.map(|(off, w)| value.get_bits(off, w));
        pp.headers[node.header] = value;
        pp.valid[node.header] = true;
        at = match selected.and_then(|v| node.edges.get(&v)) {
            Some(next) => *next,
            None => match node.default {
                Some(next) => next,
                None if node.edges.is_empty() => Next::Accept,
                None => {
                    return Err(ParseError::NoTransition {
                        header: prog.layout.names[node.header].clone(),
                        value: selected.unwrap_or(0),
                    })
                }
            },
        };
    }
    pp.payload = pkt.bytes[cursor..].to_vec();
    Ok(pp)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("key field in invalid header {header}")]
pub struct InvalidHeaderRef {
    pub header: usize,
}

/// Concatenates key fields, most significant first, into a `width`-bit key.
pub fn extract_key(pp: &ParsedPacket, fields: &[FieldRef], width: usize) -> Result<Bits, InvalidHeaderRef> {
    let mut key = Bits::zero(width);
    let mut off = 0;
    for f in fields {
        if !pp.valid[f.header] {
            return Err(InvalidHeaderRef { header: f.header });
        }
        key.set_bits(off, f.width, pp.read(*f));
        off += f.width;
    }
    debug_assert_eq!(off, width);
    Ok(key)
}

mod common;

use common::*;
use pisa_core::actions::CompiledAction;
use pisa_core::bits::Bits;
use pisa_core::deparser::{deparse, DeparseSequence};
use pisa_core::packet::{Layout, Packet, ParsedPacket};
use pisa_core::parser::{parse, ParserProgram};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn unmodified_packet_round_trips() {
    for (name, bytes) in [
        ("t0", t0_packet(&Ipv4::default(), 7, 8)),
        ("t1", t1_packet(&Ipv4::default())),
    ] {
        let spec = scenario(name);
        let pp = parse(&Packet::new(bytes.clone(), 0, 0), &ParserProgram::compile(&spec)).unwrap();
        assert_eq!(deparse(&pp, &DeparseSequence::compile(&spec)), bytes, "{name}");
    }
}

#[test]
fn invalidated_vlan_is_spliced_out() {
    let spec = patched(
        "t1",
        serde_json::json!({
            "actions": [{"name": "pop_outer", "steps": [{"op": "set_invalid", "header": "vlan_outer"}]}]
        }),
    );
    let bytes = t1_packet(&Ipv4::default());
    let pp = parse(&Packet::new(bytes.clone(), 0, 0), &ParserProgram::compile(&spec)).unwrap();
    let act = CompiledAction::compile(&spec, spec.action("pop_outer").unwrap());
    let out = act.execute(&pp, &Bits::zero(0)).unwrap();
    // The outer tag sits right after the 14-byte Ethernet header.
    let mut want = bytes[..14].to_vec();
    want.extend_from_slice(&bytes[18..]);
    let got = deparse(&out, &DeparseSequence::compile(&spec));
    assert_eq!(got.len(), bytes.len() - 4);
    assert_eq!(got, want);
}

#[test]
fn all_invalid_emits_payload_only() {
    let spec = scenario("t1");
    let layout = Layout::new(&spec);
    let mut pp = ParsedPacket::empty(&layout, 0, 0);
    pp.payload = vec![1, 2, 3];
    assert_eq!(deparse(&pp, &DeparseSequence::compile(&spec)), vec![1, 2, 3]);
}

#[test]
fn emission_follows_sequence_not_layout() {
    let spec = scenario("t0");
    let layout = Layout::new(&spec);
    let pp = parse(
        &Packet::new(t0_packet(&Ipv4::default(), 1, 2), 0, 0),
        &ParserProgram::compile(&spec),
    )
    .unwrap();
    let seq = DeparseSequence::from_names(&layout, &["udp", "ethernet"]).unwrap();
    let out = deparse(&pp, &seq);
    let mut want = pp.headers[2].as_bytes().to_vec();
    want.extend_from_slice(pp.headers[0].as_bytes());
    want.extend_from_slice(&pp.payload);
    assert_eq!(out, want);
    assert!(DeparseSequence::from_names(&layout, &["mpls"]).is_none());
}

proptest! {
    #[test]
    fn length_and_idempotence(valid in proptest::collection::vec(any::<bool>(), 8), payload in proptest::collection::vec(any::<u8>(), 0..64), seed in any::<u64>()) {
        let spec = scenario("t1");
        let layout = Layout::new(&spec);
        let mut r = rng(seed);
        let mut pp = ParsedPacket::empty(&layout, 0, 0);
        for (i, v) in valid.iter().enumerate() {
            pp.valid[i] = *v;
            let bytes: Vec<u8> = (0..layout.widths[i] / 8).map(|_| r.random()).collect();
            pp.headers[i] = Bits::from_bytes(&bytes);
        }
        pp.payload = payload.clone();
        let seq = DeparseSequence::compile(&spec);
        let out = deparse(&pp, &seq);
        let expect_len: usize = (0..8).filter(|i| valid[*i]).map(|i| layout.widths[i] / 8).sum::<usize>() + payload.len();
        prop_assert_eq!(out.len(), expect_len);
        prop_assert_eq!(&out, &deparse(&pp, &seq));

        // Output is the valid subsequence, in order.
        let mut want = Vec::new();
        for h in &seq.0 {
            if pp.valid[*h] {
                want.extend_from_slice(pp.headers[*h].as_bytes());
            }
        }
        want.extend_from_slice(&payload);
        prop_assert_eq!(out, want);
    }
}

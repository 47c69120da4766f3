#![allow(dead_code)]

use std::path::PathBuf;

use pisa_core::bits::Bits;
use pisa_core::spec::{load_pipeline_spec, PipelineSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario_path(file: &str) -> PathBuf {
    repo_root().join("scenarios").join(file)
}

pub fn scenario_text(name: &str) -> String {
    std::fs::read_to_string(scenario_path(&format!("{name}.json"))).unwrap()
}

pub fn scenario(name: &str) -> PipelineSpec {
    load_pipeline_spec(&scenario_text(name)).unwrap()
}

/// A scenario document with top-level keys replaced by `patch`.
pub fn patched(name: &str, patch: serde_json::Value) -> PipelineSpec {
    let mut doc: serde_json::Value = serde_json::from_str(&scenario_text(name)).unwrap();
    for (k, v) in patch.as_object().unwrap() {
        doc[k] = v.clone();
    }
    load_pipeline_spec(&doc.to_string()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_u128(rng: &mut impl Rng, width: usize) -> u128 {
    let v: u128 = rng.random();
    if width == 128 {
        v
    } else {
        v & ((1u128 << width) - 1)
    }
}

pub fn random_bits(rng: &mut impl Rng, width: usize) -> Bits {
    Bits::from_u128(width, random_u128(rng, width))
}

/// Internet checksum computed byte pair by byte pair.
pub fn inet_sum(bytes: &[u8]) -> u16 {
    let mut s: u32 = 0;
    for pair in bytes.chunks(2) {
        let hi = pair[0] as u32;
        let lo = pair.get(1).copied().unwrap_or(0) as u32;
        s += (hi << 8) | lo;
    }
    while s > 0xffff {
        s = (s & 0xffff) + (s >> 16);
    }
    s as u16
}

pub fn ethernet(ethertype: u16) -> Vec<u8> {
    let mut v = vec![0x02, 0, 0, 0, 0, 0x01, 0x02, 0, 0, 0, 0, 0x02];
    v.extend_from_slice(&ethertype.to_be_bytes());
    v
}

pub fn vlan(vid: u16, ethertype: u16) -> Vec<u8> {
    let mut v = vid.to_be_bytes().to_vec();
    v.extend_from_slice(&ethertype.to_be_bytes());
    v
}

#[derive(Clone, Copy, Debug)]
pub struct Ipv4 {
    pub dscp: u8,
    pub total_len: u16,
    pub ident: u16,
    pub ttl: u8,
    pub proto: u8,
    pub src: u32,
    pub dst: u32,
}

impl Default for Ipv4 {
    fn default() -> Self {
        Ipv4 {
            dscp: 0,
            total_len: 60,
            ident: 0x1234,
            ttl: 64,
            proto: 17,
            src: 0x0a00_0001,
            dst: 0xc000_0201,
        }
    }
}

impl Ipv4 {
    pub fn bytes(&self) -> Vec<u8> {
        let mut h = vec![0x45, self.dscp];
        h.extend_from_slice(&self.total_len.to_be_bytes());
        h.extend_from_slice(&self.ident.to_be_bytes());
        h.extend_from_slice(&[0x40, 0x00, self.ttl, self.proto, 0, 0]);
        h.extend_from_slice(&self.src.to_be_bytes());
        h.extend_from_slice(&self.dst.to_be_bytes());
        let c = !inet_sum(&h);
        h[10..12].copy_from_slice(&c.to_be_bytes());
        h
    }
}

pub fn udp(sport: u16, dport: u16, len: u16) -> Vec<u8> {
    [sport, dport, len, 0].iter().flat_map(|x| x.to_be_bytes()).collect()
}

pub fn vxlan(vni: u32) -> Vec<u8> {
    let mut v = vec![0x08, 0, 0, 0];
    v.extend_from_slice(&(vni << 8).to_be_bytes());
    v
}

/// 74-byte Ethernet/IPv4/UDP packet with a 32-byte payload.
pub fn t0_packet(ip: &Ipv4, sport: u16, dport: u16) -> Vec<u8> {
    let payload: Vec<u8> = (0..32u8).collect();
    let mut p = ethernet(0x0800);
    p.extend(Ipv4 { total_len: 60, ..*ip }.bytes());
    p.extend(udp(sport, dport, 40));
    p.extend(payload);
    p
}

/// 116-byte QinQ/IPv4/UDP/VXLAN/Ethernet/IPv4 packet with a 24-byte payload.
pub fn t1_packet(ip: &Ipv4) -> Vec<u8> {
    let mut inner = ethernet(0x0800);
    inner.extend(
        Ipv4 {
            total_len: 44,
            ..Ipv4::default()
        }
        .bytes(),
    );
    inner.extend((0..24u8).map(|i| i ^ 0x5a));
    let mut p = ethernet(0x88a8);
    p.extend(vlan(100, 0x8100));
    p.extend(vlan(200, 0x0800));
    p.extend(Ipv4 { total_len: 94, ..*ip }.bytes());
    p.extend(udp(5000, 4789, 74));
    p.extend(vxlan(42));
    p.extend(inner);
    p
}

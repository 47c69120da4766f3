mod common;

use std::collections::BTreeMap;

use common::*;
use pisa_core::packet::Packet;
use pisa_core::parser::{parse, ParserProgram};
use pisa_core::pipeline::{DropReason, Pipeline, RunResult};
use pisa_core::spec::PipelineSpec;
use pisa_core::trace::{read_input_trace, read_trace, write_trace, Disposition};

const SCENARIOS: [&str; 6] = ["t0", "t1", "t2", "t3", "t4", "t5"];

fn input(name: &str) -> Vec<Packet> {
    read_input_trace(&std::fs::read_to_string(scenario_path(&format!("{name}.in.trace"))).unwrap()).unwrap()
}

fn expected(name: &str) -> String {
    std::fs::read_to_string(scenario_path(&format!("{name}.expected.trace"))).unwrap()
}

fn replay(name: &str, seed: Option<u64>) -> RunResult {
    let p = Pipeline::from_file(&scenario_path(&format!("{name}.json")), seed).unwrap();
    p.run(&input(name))
}

/// Every valid `ipv4` header in a forwarded packet sums to 0xFFFF.
fn checksums_verify(spec: &PipelineSpec, result: &RunResult) -> usize {
    let prog = ParserProgram::compile(spec);
    let ip = spec.header_index("ipv4").unwrap();
    let mut checked = 0;
    for r in result.outputs.iter().filter(|r| r.is_forwarded()) {
        let pp = parse(&Packet::new(r.bytes.clone(), r.arrival_seq, r.port), &prog).unwrap();
        if pp.is_valid(ip) {
            assert_eq!(inet_sum(pp.headers[ip].as_bytes()), 0xFFFF, "output seq {}", r.seq);
            checked += 1;
        }
    }
    checked
}

#[test]
fn scenarios_replay_byte_exactly() {
    for name in SCENARIOS {
        let result = replay(name, None);
        let got = write_trace(&result.outputs);
        assert!(got == expected(name), "{name} differs from its expected trace");
        assert_eq!(read_trace(&got).unwrap(), result.outputs);
    }
}

#[test]
fn forwarded_ipv4_checksums_verify() {
    for name in ["t2", "t3", "t4", "t5"] {
        let checked = checksums_verify(&scenario(name), &replay(name, None));
        assert!(checked > 50, "{name}: only {checked} IPv4 packets checked");
    }
}

#[test]
fn every_input_is_accounted_for() {
    for name in SCENARIOS {
        let r = replay(name, None);
        let n = input(name).len();
        assert!(r.stats.conserved(), "{name}");
        assert_eq!(r.stats.packets_in as usize, n);
        assert_eq!(r.outputs.len(), n);
        let mut arrivals: Vec<u64> = r.outputs.iter().map(|o| o.arrival_seq).collect();
        arrivals.sort_unstable();
        assert_eq!(arrivals, (0..n as u64).collect::<Vec<_>>(), "{name}");
        // Emission numbers are dense.
        assert!(r.outputs.iter().enumerate().all(|(i, o)| o.seq == i as u64));
    }
}

#[test]
fn stats_match_trace() {
    for name in SCENARIOS {
        let r = replay(name, None);
        let mut by_reason: BTreeMap<String, u64> = BTreeMap::new();
        for o in &r.outputs {
            if let Disposition::Dropped(reason) = o.disposition {
                *by_reason.entry(reason.to_string()).or_default() += 1;
            }
        }
        assert_eq!(r.stats.dropped, by_reason, "{name}");
        assert_eq!(
            r.stats.forwarded as usize,
            r.outputs.iter().filter(|o| o.is_forwarded()).count()
        );
    }
}

#[test]
fn hash_seed_does_not_change_results() {
    let base = replay("t3", None);
    for seed in [0, 7, u64::MAX] {
        assert_eq!(replay("t3", Some(seed)).outputs, base.outputs);
    }
}

#[test]
fn repeated_runs_are_identical() {
    for name in SCENARIOS {
        assert_eq!(replay(name, None), replay(name, None));
    }
}

#[test]
fn empty_acl_drops_every_parsed_packet_as_miss() {
    let p = Pipeline::new(scenario("t4"), None);
    let r = p.run(&input("t4"));
    assert_eq!(r.stats.forwarded, 0);
    let parsed = r
        .outputs
        .iter()
        .filter(|o| {
            !matches!(
                o.disposition,
                Disposition::Dropped(DropReason::Truncated | DropReason::NoTransition)
            )
        })
        .count() as u64;
    assert!(parsed > 0);
    assert_eq!(r.stats.dropped.get("miss").copied(), Some(parsed));
}

#[test]
fn pifo_scenario_reorders_by_rank() {
    let r = replay("t5", None);
    let forwarded: Vec<u64> = r
        .outputs
        .iter()
        .filter(|o| o.is_forwarded())
        .map(|o| o.arrival_seq)
        .collect();
    assert!(forwarded.windows(2).any(|w| w[0] > w[1]));
    assert!(r.stats.dropped.contains_key("queue_full"));
    assert!(r.stats.queue_high_water <= 64);
}

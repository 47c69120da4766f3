mod common;

use common::*;
use pisa_core::spec::{load_pipeline_file, load_pipeline_spec, parse_pipeline_spec, validate_spec, SpecError};

const SCENARIOS: [&str; 6] = ["t0", "t1", "t2", "t3", "t4", "t5"];

fn violations(doc: &serde_json::Value) -> Vec<String> {
    match load_pipeline_spec(&doc.to_string()) {
        Err(SpecError::Invalid(r)) => r.violations.iter().map(|v| v.to_string()).collect(),
        other => panic!("expected validation failure, got {other:?}"),
    }
}

fn t0_doc() -> serde_json::Value {
    serde_json::from_str(&scenario_text("t0")).unwrap()
}

#[test]
fn t0_shape() {
    let s = scenario("t0");
    assert_eq!(s.headers.len(), 3);
    assert!(s.tables.is_empty());
    let bytes: usize = s.headers.iter().map(|h| h.byte_len()).sum();
    assert_eq!(bytes, 42);
}

#[test]
fn every_scenario_is_valid() {
    for name in SCENARIOS {
        let s = load_pipeline_file(&scenario_path(&format!("{name}.json"))).unwrap();
        assert!(validate_spec(&s).is_valid(), "{name}");
    }
}

#[test]
fn t1_has_eight_headers() {
    assert_eq!(scenario("t1").headers.len(), 8);
}

#[test]
fn serialize_round_trip() {
    for name in SCENARIOS {
        let s = scenario(name);
        let again = load_pipeline_spec(&s.to_json()).unwrap();
        assert_eq!(again, s, "{name}");
    }
}

#[test]
fn empty_header_rejected() {
    let mut d = t0_doc();
    d["headers"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"name": "shim", "fields": []}));
    let v = violations(&d);
    assert!(v.iter().any(|m| m.contains("empty header")), "{v:?}");
}

#[test]
fn cycle_rejected() {
    let mut d = t0_doc();
    d["parser"]["nodes"][2] = serde_json::json!({
        "header": "udp", "select": "dst_port",
        "transitions": [{"value": "0x0800", "next": "ipv4"}]
    });
    let v = violations(&d);
    assert!(v.iter().any(|m| m.contains("parse graph not acyclic")), "{v:?}");
}

#[test]
fn key_width_mismatch_is_one_violation() {
    let mut d = t0_doc();
    d["actions"] = serde_json::json!([{"name": "nop", "steps": [{"op": "set_field", "dst": "meta.drop", "a": "0"}]}]);
    d["tables"] = serde_json::json!([{
        "name": "t", "kind": "exact", "key": ["ipv4.dst", "udp.dst_port"],
        "key_width": 40, "capacity": 16, "actions": ["nop"]
    }]);
    let v = violations(&d);
    assert_eq!(v.len(), 1, "{v:?}");
    assert!(v[0].contains("key_width 40"));
}

#[test]
fn undeclared_deparser_header_is_one_violation() {
    let mut d = t0_doc();
    d["deparser"].as_array_mut().unwrap().push("vlan".into());
    let v = violations(&d);
    assert_eq!(v, vec!["deparser vlan: undeclared header".to_string()]);
}

#[test]
fn all_violations_are_listed() {
    let mut d = t0_doc();
    d["deparser"].as_array_mut().unwrap().push("vlan".into());
    d["scheduler"] = serde_json::json!({"capacity_entries": 0, "dequeue_every": 0});
    assert_eq!(violations(&d).len(), 3);
}

#[test]
fn syntax_error_has_position() {
    let err = parse_pipeline_spec("{\n  \"format_version\": 1,\n  \"headers\": [,\n}").unwrap_err();
    match err {
        SpecError::Syntax { line, column, .. } => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_version_rejected() {
    let mut d = t0_doc();
    d["format_version"] = 2.into();
    assert!(matches!(load_pipeline_spec(&d.to_string()), Err(SpecError::Version(2))));
}

#[test]
fn missing_file_is_io_error() {
    let err = load_pipeline_file(&scenario_path("absent.json")).unwrap_err();
    assert!(matches!(err, SpecError::Io { .. }));
}

#[test]
fn error_corpus_is_rejected() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/errors");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let err = load_pipeline_file(&path).expect_err(&path.display().to_string());
        assert!(!err.to_string().trim().is_empty());
        if let SpecError::Invalid(r) = &err {
            assert!(!r.violations.is_empty());
        }
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn metadata_layout() {
    let s = scenario("t5");
    let meta = s.meta_header();
    let names: Vec<&str> = meta.fields.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, vec!["ingress_port", "egress_port", "drop", "rank", "scratch"]);
    assert_eq!(s.header_index("meta"), Some(s.headers.len()));
    assert_eq!(s.resolve_field("meta.rank").unwrap().width, 16);
}

//! Hex-per-line packet traces.
//!
//! ```text
//! # in seq=0 port=1
//! 0011223344550066778899aa0800...
//! # out seq=0 arrival=0 port=2 forwarded
//! 0011223344550066778899aa0800...
//! # out seq=1 arrival=1 port=1 dropped(miss)
//! ```
//!
//! Every record starts with a `# in` or `# out` header line. Forwarded and
//! input records are followed by exactly one line of hex; dropped records
//! carry no bytes. Other lines starting with `#` and blank lines are
//! comments. `seq` increases strictly within each direction. Output records
//! number emissions in order; `arrival` names the input record they came from.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::{decode_hex, encode_hex};
use crate::packet::Packet;
use crate::pipeline::DropReason;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Disposition {
    Forwarded,
    Dropped(DropReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub direction: Direction,
    pub seq: u64,
    /// Input sequence number this record derives from; equals `seq` for
    /// input records.
    pub arrival_seq: u64,
    pub port: u16,
    pub disposition: Disposition,
    pub bytes: Vec<u8>,
}

impl TraceRecord {
    pub fn input(pkt: &Packet) -> Self {
        TraceRecord {
            direction: Direction::In,
            seq: pkt.arrival_seq,
            arrival_seq: pkt.arrival_seq,
            port: pkt.ingress_port,
            disposition: Disposition::Forwarded,
            bytes: pkt.bytes.clone(),
        }
    }

    pub fn to_packet(&self) -> Packet {
        Packet::new(self.bytes.clone(), self.arrival_seq, self.port)
    }

    pub fn is_forwarded(&self) -> bool {
        self.disposition == Disposition::Forwarded
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError {
        line,
        message: message.into(),
    }
}

struct Header {
    direction: Direction,
    seq: u64,
    arrival: Option<u64>,
    port: u16,
    disposition: Disposition,
}

fn parse_header(line: usize, text: &str) -> Result<Option<Header>, TraceError> {
    let mut words = text.split_whitespace();
    let direction = match words.next() {
        Some("in") => Direction::In,
        Some("out") => Direction::Out,
        _ => return Ok(None),
    };
    let (mut seq, mut arrival, mut port, mut disposition) = (None, None, None, None);
    for w in words {
        if let Some((k, v)) = w.split_once('=') {
            let n: u64 = v.parse().map_err(|_| err(line, format!("bad number in {w}")))?;
            match k {
                "seq" => seq = Some(n),
                "arrival" => arrival = Some(n),
                "port" => port = Some(u16::try_from(n).map_err(|_| err(line, format!("port {n} out of range")))?),
                _ => return Err(err(line, format!("unknown attribute {k}"))),
            }
        } else if w == "forwarded" {
            disposition = Some(Disposition::Forwarded);
        } else if let Some(r) = w.strip_prefix("dropped(").and_then(|r| r.strip_suffix(')')) {
            let reason = DropReason::from_str(r).map_err(|_| err(line, format!("unknown drop reason {r}")))?;
            disposition = Some(Disposition::Dropped(reason));
        } else {
            return Err(err(line, format!("unexpected token {w}")));
        }
    }
    let seq = seq.ok_or_else(|| err(line, "missing seq"))?;
    let port = port.ok_or_else(|| err(line, "missing port"))?;
    let disposition = match (direction, disposition) {
        (Direction::In, None) => Disposition::Forwarded,
        (Direction::In, Some(_)) => return Err(err(line, "input records carry no disposition")),
        (Direction::Out, None) => return Err(err(line, "output record without disposition")),
        (Direction::Out, Some(d)) => d,
    };
    if direction == Direction::In && arrival.is_some() {
        return Err(err(line, "input records carry no arrival attribute"));
    }
    Ok(Some(Header {
        direction,
        seq,
        arrival,
        port,
        disposition,
    }))
}

/// Reads a trace holding records of either direction.
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, Header)> = None;
    let mut last_in: Option<u64> = None;
    let mut last_out: Option<u64> = None;

    let mut finish = |h: Header, bytes: Vec<u8>, line: usize, out: &mut Vec<TraceRecord>| -> Result<(), TraceError> {
        let last = match h.direction {
            Direction::In => &mut last_in,
            Direction::Out => &mut last_out,
        };
        if last.is_some_and(|l| h.seq <= l) {
            return Err(err(line, format!("seq {} does not increase", h.seq)));
        }
        *last = Some(h.seq);
        out.push(TraceRecord {
            direction: h.direction,
            seq: h.seq,
            arrival_seq: h.arrival.unwrap_or(h.seq),
            port: h.port,
            disposition: h.disposition,
            bytes,
        });
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if let Some(rest) = t.strip_prefix('#') {
            if let Some(h) = parse_header(line, rest)? {
                if let Some((l, _)) = &pending {
                    return Err(err(line, format!("record at line {l} has no data line")));
                }
                if matches!(h.disposition, Disposition::Dropped(_)) {
                    finish(h, Vec::new(), line, &mut out)?;
                } else {
                    pending = Some((line, h));
                }
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let Some((hl, h)) = pending.take() else {
            return Err(err(line, "data line without a record header"));
        };
        if t.len() % 2 != 0 {
            return Err(err(line, "odd number of hex digits"));
        }
        let bytes = decode_hex(t).ok_or_else(|| err(line, "invalid hex"))?;
        finish(h, bytes, hl, &mut out)?;
    }
    if let Some((l, _)) = pending {
        return Err(err(l, "record has no data line"));
    }
    Ok(out)
}

/// Reads an input trace into packets.
pub fn read_input_trace(text: &str) -> Result<Vec<Packet>, TraceError> {
    let records = read_trace(text)?;
    if let Some(r) = records.iter().find(|r| r.direction == Direction::Out) {
        return Err(err(0, format!("output record seq={} in an input trace", r.seq)));
    }
    Ok(records.iter().map(TraceRecord::to_packet).collect())
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        match r.direction {
            Direction::In => {
                let _ = writeln!(s, "# in seq={} port={}", r.seq, r.port);
            }
            Direction::Out => {
                let d = match r.disposition {
                    Disposition::Forwarded => "forwarded".to_string(),
                    Disposition::Dropped(reason) => format!("dropped({reason})"),
                };
                let _ = writeln!(s, "# out seq={} arrival={} port={} {d}", r.seq, r.arrival_seq, r.port);
            }
        }
        if r.is_forwarded() {
            s.push_str(&encode_hex(&r.bytes));
            s.push('\n');
        }
    }
    s
}

pub fn write_input_trace(packets: &[Packet]) -> String {
    write_trace(&packets.iter().map(TraceRecord::input).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# comment\n# in seq=0 port=1\n00ff\n\n# in seq=2 port=3\nabcd\n";
        let recs = read_trace(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].bytes, vec![0xab, 0xcd]);
        assert_eq!(read_trace(&write_trace(&recs)).unwrap(), recs);
    }

    #[test]
    fn output_records() {
        let text = "# out seq=0 arrival=4 port=2 forwarded\n0a0b\n# out seq=1 arrival=5 port=1 dropped(miss)\n";
        let recs = read_trace(text).unwrap();
        assert_eq!(recs[0].arrival_seq, 4);
        assert_eq!(recs[1].disposition, Disposition::Dropped(DropReason::Miss));
        assert!(recs[1].bytes.is_empty());
        assert_eq!(write_trace(&recs), text);
    }

    #[test]
    fn malformed() {
        for bad in [
            "# in seq=0 port=1\nabc\n",
            "# in seq=0 port=1\nzz\n",
            "# in seq=1 port=1\n00\n# in seq=1 port=1\n00\n",
            "00\n",
            "# in seq=0 port=1\n",
            "# in seq=0\n00\n",
            "# in seq=0 port=70000\n00\n",
            "# out seq=0 arrival=0 port=1 dropped(bogus)\n",
        ] {
            assert!(read_trace(bad).is_err(), "{bad:?}");
        }
    }
}

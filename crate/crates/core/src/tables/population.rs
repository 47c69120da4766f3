//! Table population files.
//!
//! One entry per line, `#` starts a comment:
//!
//! ```text
//! <kind> <key>[/<mask|len>] <priority> <action> <data-hex>
//! exact   0x0a000001           -  set_port 0x0003
//! ternary 0x0a000000/0xff000000 10 set_port 0x0001
//! lpm     0x0a000000/8          -  set_port 0x0002
//! ```
//!
//! Keys and masks are hex of the table's key width; `len` is decimal.
//! Priority is required for ternary entries and ignored (`-` allowed) for the
//! others. `-` as data means all-zero action data.

use thiserror::Error;

use super::{ActionCall, ExactEntry, Prefix, TableEntry, TernaryRule};
use crate::bits::Bits;
use crate::spec::{parse_action_data, MatchKind, PipelineSpec, TableDecl};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct PopulationError {
    pub line: usize,
    pub message: String,
}

fn parse_kind(s: &str) -> Option<MatchKind> {
    match s {
        "exact" => Some(MatchKind::Exact),
        "ternary" => Some(MatchKind::Ternary),
        "lpm" => Some(MatchKind::Lpm),
        _ => None,
    }
}

/// Parses a population file for `table`.
pub fn parse_population(
    spec: &PipelineSpec,
    table: &TableDecl,
    text: &str,
) -> Result<Vec<TableEntry>, PopulationError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| PopulationError { line, message };
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(err(format!("expected 5 columns, found {}", cols.len())));
        }
        let kind = parse_kind(cols[0]).ok_or_else(|| err(format!("unknown kind {:?}", cols[0])))?;
        if kind != table.kind {
            return Err(err(format!("{kind} entry in {} table {}", table.kind, table.name)));
        }
        let action = cols[3];
        if !table.actions.iter().any(|a| a == action) {
            return Err(err(format!("action {action} not allowed in table {}", table.name)));
        }
        let prog = spec
            .action(action)
            .ok_or_else(|| err(format!("unknown action {action}")))?;
        let data = parse_action_data(prog, cols[4]).ok_or_else(|| {
            err(format!(
                "action data {:?} does not fit {} bits",
                cols[4],
                prog.data_bits()
            ))
        })?;
        let call = ActionCall::new(action, data);
        let w = table.key_width;
        let hex = |s: &str| Bits::from_hex(w, s).ok_or_else(|| err(format!("{s:?} is not a {w}-bit hex value")));
        let (key_text, qual) = match cols[1].split_once('/') {
            Some((k, q)) => (k, Some(q)),
            None => (cols[1], None),
        };
        let key = hex(key_text)?;
        let entry = match kind {
            MatchKind::Exact => {
                if qual.is_some() {
                    return Err(err("exact entries take no mask".into()));
                }
                TableEntry::Exact(ExactEntry { key, call })
            }
            MatchKind::Ternary => {
                let mask = hex(qual.ok_or_else(|| err("ternary entry needs /mask".into()))?)?;
                let priority = cols[2]
                    .parse()
                    .map_err(|_| err(format!("bad priority {:?}", cols[2])))?;
                if !key.and(&mask.not()).is_zero() {
                    return Err(err("value has bits outside the mask".into()));
                }
                TableEntry::Ternary(TernaryRule {
                    value: key,
                    mask,
                    priority,
                    call,
                })
            }
            MatchKind::Lpm => {
                let q = qual.ok_or_else(|| err("lpm entry needs /len".into()))?;
                let len = q.parse().map_err(|_| err(format!("bad prefix length {q:?}")))?;
                let prefix = Prefix::new(key, len).map_err(|e| err(e.to_string()))?;
                TableEntry::Lpm(prefix, call)
            }
        };
        out.push(entry);
    }
    Ok(out)
}

/// Renders entries back into the file format.
pub fn render_population(entries: &[TableEntry]) -> String {
    let data = |c: &ActionCall| {
        if c.data.width() == 0 {
            "-".to_string()
        } else {
            c.data.to_hex()
        }
    };
    let mut s = String::new();
    for e in entries {
        let line = match e {
            TableEntry::Exact(x) => format!("exact {} - {} {}", x.key.to_hex(), x.call.action, data(&x.call)),
            TableEntry::Ternary(r) => format!(
                "ternary {}/{} {} {} {}",
                r.value.to_hex(),
                r.mask.to_hex(),
                r.priority,
                r.call.action,
                data(&r.call)
            ),
            TableEntry::Lpm(p, c) => format!("lpm {}/{} - {} {}", p.bits.to_hex(), p.length, c.action, data(c)),
        };
        s.push_str(&line);
        s.push('\n');
    }
    s
}

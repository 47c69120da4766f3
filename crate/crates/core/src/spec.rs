//! Pipeline specification documents: data model, JSON loading and validation.
//!
//! A [`PipelineSpec`] names every element by string. Loading runs
//! [`validate_spec`] and refuses documents with violations, so a spec that
//! came out of [`load_pipeline_spec`] has every reference resolvable through
//! [`PipelineSpec::resolve_field`] and friends.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cost::PlatformConfig;

pub const FORMAT_VERSION: u32 = 1;
/// Pseudo-header holding per-packet metadata. Always valid, never emitted.
pub const META: &str = "meta";
/// Parser target that ends header extraction.
pub const ACCEPT: &str = "accept";
pub const MAX_FIELD_BITS: usize = 128;

/// Metadata fields every pipeline carries, ahead of user-declared ones.
/// `rank` takes its width from the scheduler config.
pub const INTRINSIC_META: [(&str, usize); 3] = [("ingress_port", 16), ("egress_port", 16), ("drop", 1)];

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid pipeline spec:\n{0}")]
    Invalid(ValidationReport),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// An unsigned literal. Accepts JSON numbers or decimal/hex strings and
/// always serializes as a hex string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(pub u128);

impl Literal {
    pub fn parse(text: &str) -> Option<Literal> {
        let t = text.trim();
        let v = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            u128::from_str_radix(&h.replace('_', ""), 16).ok()?
        } else if let Some(b) = t.strip_prefix("0b") {
            u128::from_str_radix(&b.replace('_', ""), 2).ok()?
        } else {
            t.replace('_', "").parse().ok()?
        };
        Some(Literal(v))
    }
}

impl Serialize for Literal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:#x}", self.0))
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(n) => Ok(Literal(n as u128)),
            Repr::Text(t) => Literal::parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad literal {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub width: usize,
}

impl FieldDecl {
    pub fn new(name: &str, width: usize) -> Self {
        FieldDecl {
            name: name.to_string(),
            width,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderType {
    pub name: String,
    pub fields: Vec<FieldDecl>,
}

impl HeaderType {
    pub fn total_bits(&self) -> usize {
        self.fields.iter().map(|f| f.width).sum()
    }

    pub fn byte_len(&self) -> usize {
        self.total_bits().div_ceil(8)
    }

    /// Bit offset and width of a named field.
    pub fn field(&self, name: &str) -> Option<(usize, usize)> {
        let mut off = 0;
        for f in &self.fields {
            if f.name == name {
                return Some((off, f.width));
            }
            off += f.width;
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub value: Literal,
    pub next: String,
}

/// One parse-graph node: the header extracted there, the field selecting the
/// next node, its exact-value edges and an optional default edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseNode {
    pub header: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub select: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<Transition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseGraph {
    pub start: String,
    pub nodes: Vec<ParseNode>,
}

impl ParseGraph {
    pub fn node(&self, header: &str) -> Option<&ParseNode> {
        self.nodes.iter().find(|n| n.header == header)
    }

    /// Nodes in topological order, or `None` if the graph has a cycle.
    /// Edges to unknown nodes are ignored here.
    pub fn topo_order(&self) -> Option<Vec<&str>> {
        let names: HashSet<&str> = self.nodes.iter().map(|n| n.header.as_str()).collect();
        let mut indeg: BTreeMap<&str, usize> = names.iter().map(|n| (*n, 0)).collect();
        fn succ<'a>(n: &'a ParseNode, names: &HashSet<&str>) -> Vec<&'a str> {
            let mut s: Vec<&str> = n.transitions.iter().map(|t| t.next.as_str()).collect();
            s.extend(n.default.as_deref());
            s.sort_unstable();
            s.dedup();
            s.retain(|t| names.contains(t));
            s
        }
        for n in &self.nodes {
            for t in succ(n, &names) {
                *indeg.get_mut(t).unwrap() += 1;
            }
        }
        let mut ready: Vec<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut order = Vec::new();
        while let Some(n) = ready.pop() {
            order.push(n);
            if let Some(node) = self.node(n) {
                for t in succ(node, &names) {
                    let d = indeg.get_mut(t).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        (order.len() == names.len()).then_some(order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Ternary,
    Lpm,
}

impl fmt::Display for MatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchKind::Exact => "exact",
            MatchKind::Ternary => "ternary",
            MatchKind::Lpm => "lpm",
        })
    }
}

/// What a table does when the key misses (or cannot be built).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum MissPolicy {
    #[default]
    Continue,
    Drop,
    Action {
        action: String,
        #[serde(default)]
        data: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDecl {
    pub name: String,
    pub kind: MatchKind,
    pub key: Vec<String>,
    pub key_width: usize,
    pub capacity: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunk_width: Option<usize>,
    pub actions: Vec<String>,
    #[serde(default)]
    pub on_miss: MissPolicy,
    /// Population file, relative to the spec file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<String>,
}

impl TableDecl {
    /// Number of chunk memories for a ternary table.
    pub fn chunks(&self) -> Option<usize> {
        self.chunk_width.map(|w| self.key_width.div_ceil(w))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: u128, rhs: u128) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
            Relation::Lt => lhs < rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: String,
    pub rel: Relation,
    pub rhs: String,
}

/// One primitive action step. Operands are `header.field`, `meta.field`,
/// `data.param` or an unsigned literal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Add {
        dst: String,
        a: String,
        b: String,
    },
    Sub {
        dst: String,
        a: String,
        b: String,
    },
    And {
        dst: String,
        a: String,
        b: String,
    },
    Or {
        dst: String,
        a: String,
        b: String,
    },
    Xor {
        dst: String,
        a: String,
        b: String,
    },
    Not {
        dst: String,
        a: String,
    },
    ShlConst {
        dst: String,
        a: String,
        amount: u32,
    },
    ShrConst {
        dst: String,
        a: String,
        amount: u32,
    },
    SetField {
        dst: String,
        a: String,
    },
    SetValid {
        header: String,
    },
    SetInvalid {
        header: String,
    },
    Select {
        dst: String,
        cond: Condition,
        then: String,
        #[serde(rename = "else")]
        otherwise: String,
    },
    ChecksumIpv4 {
        dst: String,
        header: String,
    },
}

impl Step {
    pub fn dst(&self) -> Option<&str> {
        match self {
            Step::Add { dst, .. }
            | Step::Sub { dst, .. }
            | Step::And { dst, .. }
            | Step::Or { dst, .. }
            | Step::Xor { dst, .. }
            | Step::Not { dst, .. }
            | Step::ShlConst { dst, .. }
            | Step::ShrConst { dst, .. }
            | Step::SetField { dst, .. }
            | Step::Select { dst, .. }
            | Step::ChecksumIpv4 { dst, .. } => Some(dst),
            Step::SetValid { .. } | Step::SetInvalid { .. } => None,
        }
    }

    /// Value operands read by this step.
    pub fn sources(&self) -> Vec<&str> {
        match self {
            Step::Add { a, b, .. }
            | Step::Sub { a, b, .. }
            | Step::And { a, b, .. }
            | Step::Or { a, b, .. }
            | Step::Xor { a, b, .. } => vec![a, b],
            Step::Not { a, .. } | Step::ShlConst { a, .. } | Step::ShrConst { a, .. } | Step::SetField { a, .. } => {
                vec![a]
            }
            Step::Select {
                cond, then, otherwise, ..
            } => vec![&cond.lhs, &cond.rhs, then, otherwise],
            Step::SetValid { .. } | Step::SetInvalid { .. } | Step::ChecksumIpv4 { .. } => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionProgram {
    pub name: String,
    #[serde(default)]
    pub params: Vec<FieldDecl>,
    pub steps: Vec<Step>,
}

impl ActionProgram {
    pub fn data_bits(&self) -> usize {
        self.params.iter().map(|p| p.width).sum()
    }

    pub fn param(&self, name: &str) -> Option<(usize, usize)> {
        let mut off = 0;
        for p in &self.params {
            if p.name == name {
                return Some((off, p.width));
            }
            off += p.width;
        }
        None
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    #[default]
    Fifo,
    Pifo,
    Systolic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub kind: SchedulerKind,
    pub capacity_entries: usize,
    pub rank_bits: usize,
    pub buffer_bytes: u64,
    /// The queue emits one packet after every this many arrivals and drains
    /// at end of trace.
    pub dequeue_every: usize,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            kind: SchedulerKind::Fifo,
            capacity_entries: 1024,
            rank_bits: 16,
            buffer_bytes: 1_250_000,
            dequeue_every: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    /// Seed for table hash functions.
    #[serde(default)]
    pub seed: u64,
    pub headers: Vec<HeaderType>,
    #[serde(default)]
    pub metadata: Vec<FieldDecl>,
    pub parser: ParseGraph,
    #[serde(default)]
    pub tables: Vec<TableDecl>,
    #[serde(default)]
    pub actions: Vec<ActionProgram>,
    pub deparser: Vec<String>,
    #[serde(default)]
    pub scheduler: SchedulerConfig,
    #[serde(default)]
    pub platform: PlatformConfig,
}

/// A resolved field location. `header` indexes [`PipelineSpec::all_headers`];
/// the metadata pseudo-header is last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldRef {
    pub header: usize,
    pub offset: usize,
    pub width: usize,
}

/// A parsed action operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Field(String, String),
    Data(String),
    Const(u128),
}

impl Operand {
    pub fn parse(text: &str) -> Option<Operand> {
        let t = text.trim();
        if t.starts_with(|c: char| c.is_ascii_digit()) {
            return Literal::parse(t).map(|l| Operand::Const(l.0));
        }
        let (h, f) = t.split_once('.')?;
        if h.is_empty() || f.is_empty() || f.contains('.') {
            return None;
        }
        if h == "data" {
            Some(Operand::Data(f.to_string()))
        } else {
            Some(Operand::Field(h.to_string(), f.to_string()))
        }
    }
}

impl PipelineSpec {
    /// The metadata pseudo-header: intrinsic fields, `rank`, then user fields.
    pub fn meta_header(&self) -> HeaderType {
        let mut fields: Vec<FieldDecl> = INTRINSIC_META.iter().map(|(n, w)| FieldDecl::new(n, *w)).collect();
        fields.push(FieldDecl::new("rank", self.scheduler.rank_bits));
        fields.extend(self.metadata.iter().cloned());
        HeaderType {
            name: META.to_string(),
            fields,
        }
    }

    /// Declared headers followed by the metadata pseudo-header.
    pub fn all_headers(&self) -> Vec<HeaderType> {
        let mut v = self.headers.clone();
        v.push(self.meta_header());
        v
    }

    pub fn header_index(&self, name: &str) -> Option<usize> {
        if name == META {
            return Some(self.headers.len());
        }
        self.headers.iter().position(|h| h.name == name)
    }

    pub fn header(&self, name: &str) -> Option<&HeaderType> {
        self.headers.iter().find(|h| h.name == name)
    }

    /// Resolves `header.field` (including `meta.field`).
    pub fn resolve_field(&self, path: &str) -> Option<FieldRef> {
        let (h, f) = path.split_once('.')?;
        let idx = self.header_index(h)?;
        let (offset, width) = if h == META {
            self.meta_header().field(f)?
        } else {
            self.headers[idx].field(f)?
        };
        Some(FieldRef {
            header: idx,
            offset,
            width,
        })
    }

    pub fn action(&self, name: &str) -> Option<&ActionProgram> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&TableDecl> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub element: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, element: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            element: element.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Parses and validates a spec document.
pub fn load_pipeline_spec(document: &str) -> Result<PipelineSpec, SpecError> {
    let spec = parse_pipeline_spec(document)?;
    let report = validate_spec(&spec);
    if report.is_valid() {
        Ok(spec)
    } else {
        Err(SpecError::Invalid(report))
    }
}

/// Structural parse only; no invariant checks beyond the JSON shape.
pub fn parse_pipeline_spec(document: &str) -> Result<PipelineSpec, SpecError> {
    let spec: PipelineSpec = serde_json::from_str(document).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if spec.format_version != FORMAT_VERSION {
        return Err(SpecError::Version(spec.format_version));
    }
    Ok(spec)
}

pub fn load_pipeline_file(path: &Path) -> Result<PipelineSpec, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_pipeline_spec(&text)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_fields(report: &mut ValidationReport, owner: &str, fields: &[FieldDecl]) {
    let mut seen = HashSet::new();
    for f in fields {
        let el = format!("{owner}.{}", f.name);
        if !is_identifier(&f.name) {
            report.push(&el, "field name is not an identifier");
        }
        if !seen.insert(f.name.as_str()) {
            report.push(&el, "duplicate field name");
        }
        if f.width == 0 || f.width > MAX_FIELD_BITS {
            report.push(&el, format!("field width {} outside 1..={MAX_FIELD_BITS}", f.width));
        }
    }
}

/// Checks every spec invariant; an empty report means the spec is valid.
pub fn validate_spec(spec: &PipelineSpec) -> ValidationReport {
    let mut r = ValidationReport::default();

    // Headers.
    let mut header_names = HashSet::new();
    for h in &spec.headers {
        let el = format!("header {}", h.name);
        if !is_identifier(&h.name) || h.name == META || h.name == ACCEPT {
            r.push(&el, "header name is not a usable identifier");
        }
        if !header_names.insert(h.name.as_str()) {
            r.push(&el, "duplicate header name");
        }
        if h.fields.is_empty() {
            r.push(&el, "empty header");
            continue;
        }
        check_fields(&mut r, &h.name, &h.fields);
        if h.total_bits() % 8 != 0 {
            r.push(
                &el,
                format!("total width {} bits is not a whole number of octets", h.total_bits()),
            );
        }
    }
    let meta = spec.meta_header();
    check_fields(&mut r, META, &meta.fields);
    if spec.scheduler.rank_bits == 0 || spec.scheduler.rank_bits > 64 {
        r.push("scheduler", "rank_bits outside 1..=64");
    }

    validate_parser(spec, &mut r);

    // Actions.
    let mut action_names = HashSet::new();
    for a in &spec.actions {
        let el = format!("action {}", a.name);
        if !action_names.insert(a.name.as_str()) {
            r.push(&el, "duplicate action name");
        }
        check_fields(&mut r, &el, &a.params);
        if a.steps.is_empty() {
            r.push(&el, "action has no steps");
        }
        for (i, step) in a.steps.iter().enumerate() {
            validate_step(spec, a, step, &format!("{el} step {i}"), &mut r);
        }
    }

    // Tables.
    let mut table_names = HashSet::new();
    for t in &spec.tables {
        let el = format!("table {}", t.name);
        if !table_names.insert(t.name.as_str()) {
            r.push(&el, "duplicate table name");
        }
        let mut width = 0;
        for k in &t.key {
            match spec.resolve_field(k) {
                Some(f) => width += f.width,
                None => r.push(&el, format!("unresolved key field {k}")),
            }
        }
        if width != t.key_width {
            r.push(
                &el,
                format!("key_width {} differs from key field total {width}", t.key_width),
            );
        }
        if t.capacity == 0 {
            r.push(&el, "capacity must be at least 1");
        }
        match (t.kind, t.chunk_width) {
            (MatchKind::Ternary, Some(w)) if w == 0 || w > t.key_width => {
                r.push(&el, format!("chunk_width {w} outside 1..={}", t.key_width))
            }
            (MatchKind::Ternary, Some(w)) if w > 24 => {
                r.push(&el, format!("chunk_width {w} exceeds the 24-bit address limit"))
            }
            (MatchKind::Ternary, None) => r.push(&el, "ternary table needs chunk_width"),
            (MatchKind::Exact | MatchKind::Lpm, Some(_)) => r.push(&el, "chunk_width applies to ternary tables only"),
            _ => {}
        }
        if t.kind != MatchKind::Exact && t.key_width == 0 {
            r.push(&el, "only exact tables may be keyless");
        }
        if t.kind == MatchKind::Exact && t.key_width == 0 && t.entries.is_some() {
            r.push(&el, "keyless table cannot have entries");
        }
        for a in &t.actions {
            if spec.action(a).is_none() {
                r.push(&el, format!("unresolved action {a}"));
            }
        }
        if let MissPolicy::Action { action, data } = &t.on_miss {
            if !t.actions.contains(action) {
                r.push(&el, format!("miss action {action} not in the table's action set"));
            }
            if let Some(prog) = spec.action(action) {
                if parse_action_data(prog, data).is_none() {
                    r.push(
                        &el,
                        format!("miss action data {data:?} does not fit {} bits", prog.data_bits()),
                    );
                }
            }
        }
    }

    // Deparser.
    let mut emitted = HashSet::new();
    for name in &spec.deparser {
        if spec.header(name).is_none() {
            r.push(format!("deparser {name}"), "undeclared header");
        } else if !emitted.insert(name.as_str()) {
            r.push(format!("deparser {name}"), "header emitted twice");
        }
    }

    // Scheduler and platform.
    let s = &spec.scheduler;
    if s.capacity_entries == 0 {
        r.push("scheduler", "capacity_entries must be at least 1");
    }
    if s.dequeue_every == 0 {
        r.push("scheduler", "dequeue_every must be at least 1");
    }
    for msg in spec.platform.violations() {
        r.push("platform", msg);
    }
    r
}

fn validate_parser(spec: &PipelineSpec, r: &mut ValidationReport) {
    let g = &spec.parser;
    let mut nodes = HashSet::new();
    for n in &g.nodes {
        let el = format!("parser node {}", n.header);
        if !nodes.insert(n.header.as_str()) {
            r.push(&el, "header appears in more than one node");
        }
        let Some(h) = spec.header(&n.header) else {
            r.push(&el, "undeclared header");
            continue;
        };
        let sel_width = match &n.select {
            Some(f) => match h.field(f) {
                Some((_, w)) => Some(w),
                None => {
                    r.push(&el, format!("selector field {f} not in header"));
                    None
                }
            },
            None => {
                if !n.transitions.is_empty() {
                    r.push(&el, "transitions without a selector field");
                }
                None
            }
        };
        let mut values = HashSet::new();
        for t in &n.transitions {
            if !values.insert(t.value) {
                r.push(&el, format!("more than one edge for value {:#x}", t.value.0));
            }
            if let Some(w) = sel_width {
                if w < 128 && t.value.0 >> w != 0 {
                    r.push(&el, format!("value {:#x} wider than selector", t.value.0));
                }
            }
        }
        for next in n
            .transitions
            .iter()
            .map(|t| t.next.as_str())
            .chain(n.default.as_deref())
        {
            if next != ACCEPT && !g.nodes.iter().any(|m| m.header == next) {
                r.push(&el, format!("edge to unknown node {next}"));
            }
            if next == g.start {
                r.push(&el, "edge into the start node");
            }
        }
    }
    if !g.nodes.iter().any(|n| n.header == g.start) {
        r.push("parser", format!("start node {} is not a parse node", g.start));
    }
    if g.topo_order().is_none() {
        r.push("parser", "parse graph not acyclic");
    }
}

/// Width of an operand in the context of an action, or an error message.
fn operand_width(spec: &PipelineSpec, action: &ActionProgram, text: &str) -> Result<Option<usize>, String> {
    match Operand::parse(text) {
        None => Err(format!("malformed operand {text:?}")),
        Some(Operand::Const(v)) => Ok(Some(128 - v.leading_zeros() as usize).filter(|w| *w > 0)),
        Some(Operand::Data(p)) => action
            .param(&p)
            .map(|(_, w)| Some(w))
            .ok_or_else(|| format!("unresolved action parameter {p}")),
        Some(Operand::Field(..)) => spec
            .resolve_field(text)
            .map(|f| Some(f.width))
            .ok_or_else(|| format!("unresolved field {text}")),
    }
}

fn validate_step(spec: &PipelineSpec, action: &ActionProgram, step: &Step, el: &str, r: &mut ValidationReport) {
    let dst_width = match step.dst() {
        Some(d) => match Operand::parse(d) {
            Some(Operand::Field(..)) => match spec.resolve_field(d) {
                Some(f) => Some(f.width),
                None => {
                    r.push(el, format!("unresolved field {d}"));
                    None
                }
            },
            _ => {
                r.push(el, format!("destination {d:?} is not a writable field"));
                None
            }
        },
        None => None,
    };
    let is_select = matches!(step, Step::Select { .. });
    for (i, src) in step.sources().into_iter().enumerate() {
        match operand_width(spec, action, src) {
            Err(m) => r.push(el, m),
            Ok(w) => {
                // Condition operands are compared, not stored.
                let compared = is_select && i < 2;
                if let (Some(w), Some(dw), false) = (w, dst_width, compared) {
                    if w > dw {
                        r.push(
                            el,
                            format!("operand {src} ({w} bits) wider than destination ({dw} bits)"),
                        );
                    }
                }
            }
        }
    }
    match step {
        Step::ShlConst { amount, .. } | Step::ShrConst { amount, .. } if *amount >= 128 => {
            r.push(el, format!("shift amount {amount} not below 128"))
        }
        Step::SetValid { header } | Step::SetInvalid { header } => {
            if spec.header(header).is_none() {
                r.push(el, format!("unresolved header {header}"));
            }
        }
        Step::ChecksumIpv4 { header, .. } => match spec.header(header) {
            None => r.push(el, format!("unresolved header {header}")),
            Some(h) => {
                if h.total_bits() != 160 {
                    r.push(el, format!("checksum header {header} is not 20 octets"));
                }
                if dst_width.is_some_and(|w| w != 16) {
                    r.push(el, "checksum destination must be 16 bits");
                }
            }
        },
        _ => {}
    }
}

/// Decodes hex action data into a value of exactly `data_bits()` width.
/// Empty text stands for all-zero data.
pub fn parse_action_data(action: &ActionProgram, text: &str) -> Option<crate::bits::Bits> {
    let width = action.data_bits();
    let t = text.trim();
    if t.is_empty() || t == "-" {
        return Some(crate::bits::Bits::zero(width));
    }
    crate::bits::Bits::from_hex(width, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal() -> &'static str {
        r#"{
          "format_version": 1,
          "headers": [
            {"name": "a", "fields": [{"name": "kind", "width": 8}, {"name": "x", "width": 8}]},
            {"name": "b", "fields": [{"name": "y", "width": 16}]}
          ],
          "parser": {"start": "a", "nodes": [
            {"header": "a", "select": "kind", "transitions": [{"value": "0x01", "next": "b"}], "default": "accept"},
            {"header": "b", "default": "accept"}
          ]},
          "deparser": ["a", "b"]
        }"#
    }

    #[test]
    fn minimal_spec_loads() {
        let s = load_pipeline_spec(minimal()).unwrap();
        assert_eq!(s.headers.len(), 2);
        assert_eq!(s.resolve_field("b.y").unwrap().width, 16);
        assert_eq!(s.resolve_field("meta.rank").unwrap().width, 16);
        assert_eq!(s.resolve_field("meta.drop").unwrap().offset, 32);
        assert!(s.resolve_field("b.nope").is_none());
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = load_pipeline_spec("{\n  \"format_version\": 1,\n  oops\n}").unwrap_err();
        match err {
            SpecError::Syntax { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn cycle_rejected() {
        let doc = minimal().replace(
            r#"{"header": "b", "default": "accept"}"#,
            r#"{"header": "b", "default": "a"}"#,
        );
        let err = load_pipeline_spec(&doc).unwrap_err().to_string();
        assert!(err.contains("parse graph not acyclic"), "{err}");
    }

    #[test]
    fn empty_header_rejected() {
        let doc = minimal().replace(r#"[{"name": "y", "width": 16}]"#, "[]");
        let err = load_pipeline_spec(&doc).unwrap_err().to_string();
        assert!(err.contains("empty header"), "{err}");
    }

    #[test]
    fn deparser_dangling_reference_is_one_violation() {
        let mut s = load_pipeline_spec(minimal()).unwrap();
        s.deparser.push("vlan".into());
        let r = validate_spec(&s);
        assert_eq!(r.violations.len(), 1, "{r}");
        assert!(r.violations[0].element.contains("vlan"));
    }

    #[test]
    fn literal_forms() {
        assert_eq!(Literal::parse("0x0800"), Some(Literal(0x800)));
        assert_eq!(Literal::parse("17"), Some(Literal(17)));
        assert_eq!(Literal::parse("0b101"), Some(Literal(5)));
        assert_eq!(Literal::parse("x"), None);
        assert_eq!(serde_json::to_string(&Literal(255)).unwrap(), "\"0xff\"");
    }

    #[test]
    fn operand_forms() {
        assert_eq!(
            Operand::parse("ipv4.ttl"),
            Some(Operand::Field("ipv4".into(), "ttl".into()))
        );
        assert_eq!(Operand::parse("data.port"), Some(Operand::Data("port".into())));
        assert_eq!(Operand::parse("0xff"), Some(Operand::Const(255)));
        assert_eq!(Operand::parse("ttl"), None);
        assert_eq!(Operand::parse("a.b.c"), None);
    }
}

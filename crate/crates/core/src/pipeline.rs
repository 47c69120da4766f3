//! End-to-end packet processing: parse, match-action stages, buffer and
//! scheduler, deparse.
//!
//! Packets run to completion one at a time. Bus-width segmentation is a
//! cost-model concern only and never changes functional results.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::actions::CompiledAction;
use crate::bits::Bits;
use crate::deparser::{deparse, DeparseSequence};
use crate::packet::{Packet, ParsedPacket};
use crate::parser::{extract_key, parse, ParseError, ParserProgram};
use crate::sched::{build_scheduler, Admission, PacketBuffer, RankedEntry, Scheduler};
use crate::spec::{load_pipeline_file, parse_action_data, FieldRef, MissPolicy, PipelineSpec, SpecError};
use crate::tables::population::{parse_population, PopulationError};
use crate::tables::{InsertOutcome, MatchTable, TableError};
use crate::trace::{Direction, Disposition, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    Oversize,
    Truncated,
    NoTransition,
    InvalidFieldAccess,
    Miss,
    Action,
    BufferOverflow,
    QueueFull,
}

impl DropReason {
    pub const ALL: [DropReason; 8] = [
        DropReason::Oversize,
        DropReason::Truncated,
        DropReason::NoTransition,
        DropReason::InvalidFieldAccess,
        DropReason::Miss,
        DropReason::Action,
        DropReason::BufferOverflow,
        DropReason::QueueFull,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Oversize => "oversize",
            DropReason::Truncated => "truncated",
            DropReason::NoTransition => "no_transition",
            DropReason::InvalidFieldAccess => "invalid_field_access",
            DropReason::Miss => "miss",
            DropReason::Action => "action",
            DropReason::BufferOverflow => "buffer_overflow",
            DropReason::QueueFull => "queue_full",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DropReason {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        DropReason::ALL.into_iter().find(|r| r.as_str() == s).ok_or(())
    }
}

impl From<ParseError> for DropReason {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Truncated { .. } => DropReason::Truncated,
            ParseError::NoTransition { .. } => DropReason::NoTransition,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: table {table}: {error}")]
    Population {
        table: String,
        path: String,
        error: PopulationError,
    },
    #[error("table {table}: entry {index}: {error}")]
    Entry {
        table: String,
        index: usize,
        error: TableError,
    },
    #[error("table {table}: full after {index} entries")]
    TableFull { table: String, index: usize },
}

#[derive(Clone, Debug)]
enum Miss {
    Continue,
    Drop,
    Action(usize, Bits),
}

#[derive(Clone, Debug)]
struct Stage {
    name: String,
    key: Vec<FieldRef>,
    key_width: usize,
    table: MatchTable,
    miss: Miss,
}

/// Result of the functional stages for one packet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ingress {
    pub outcome: Result<Egress, DropReason>,
    /// `(stage index, hit)` for every lookup performed.
    pub lookups: Vec<(usize, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Egress {
    pub bytes: Vec<u8>,
    pub port: u16,
    pub rank: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TableStats {
    pub hits: u64,
    pub misses: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub packets_in: u64,
    pub forwarded: u64,
    pub dropped: BTreeMap<String, u64>,
    pub tables: BTreeMap<String, TableStats>,
    pub buffer_high_water_bytes: u64,
    pub queue_high_water: usize,
}

impl RunStats {
    pub fn dropped_total(&self) -> u64 {
        self.dropped.values().sum()
    }

    pub fn conserved(&self) -> bool {
        self.packets_in == self.forwarded + self.dropped_total()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub outputs: Vec<TraceRecord>,
    pub stats: RunStats,
}

/// A compiled, populated pipeline.
#[derive(Clone, Debug)]
pub struct Pipeline {
    spec: PipelineSpec,
    parser: ParserProgram,
    stages: Vec<Stage>,
    actions: Vec<CompiledAction>,
    deparse: DeparseSequence,
    egress_port: FieldRef,
    drop: FieldRef,
    rank: FieldRef,
}

fn meta_field(spec: &PipelineSpec, name: &str) -> FieldRef {
    spec.resolve_field(&format!("meta.{name}")).expect("intrinsic metadata")
}

impl Pipeline {
    /// Builds a pipeline with empty tables. `seed` overrides the spec seed.
    pub fn new(spec: PipelineSpec, seed: Option<u64>) -> Self {
        let seed = seed.unwrap_or(spec.seed);
        let action_index: HashMap<&str, usize> = spec
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.as_str(), i))
            .collect();
        let actions = spec.actions.iter().map(|a| CompiledAction::compile(&spec, a)).collect();
        let stages = spec
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let miss = match &t.on_miss {
                    MissPolicy::Continue => Miss::Continue,
                    MissPolicy::Drop => Miss::Drop,
                    MissPolicy::Action { action, data } => {
                        let prog = spec.action(action).expect("validated miss action");
                        let data = parse_action_data(prog, data).expect("validated miss data");
                        Miss::Action(action_index[action.as_str()], data)
                    }
                };
                Stage {
                    name: t.name.clone(),
                    key: t
                        .key
                        .iter()
                        .map(|k| spec.resolve_field(k).expect("validated key"))
                        .collect(),
                    key_width: t.key_width,
                    table: MatchTable::for_decl(t, seed.wrapping_add(i as u64)),
                    miss,
                }
            })
            .collect();
        Pipeline {
            parser: ParserProgram::compile(&spec),
            deparse: DeparseSequence::compile(&spec),
            egress_port: meta_field(&spec, "egress_port"),
            drop: meta_field(&spec, "drop"),
            rank: meta_field(&spec, "rank"),
            stages,
            actions,
            spec,
        }
    }

    /// Builds a pipeline and loads each table's population file, resolved
    /// against `base_dir`.
    pub fn with_entries(spec: PipelineSpec, base_dir: &Path, seed: Option<u64>) -> Result<Self, PipelineError> {
        let mut p = Pipeline::new(spec, seed);
        for i in 0..p.stages.len() {
            let decl = &p.spec.tables[i];
            let Some(rel) = &decl.entries else { continue };
            let path: PathBuf = base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|source| PipelineError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let entries = parse_population(&p.spec, decl, &text).map_err(|error| PipelineError::Population {
                table: decl.name.clone(),
                path: path.display().to_string(),
                error,
            })?;
            let name = decl.name.clone();
            for (index, e) in entries.into_iter().enumerate() {
                match p.stages[i].table.insert(e) {
                    Ok(InsertOutcome::Full) => return Err(PipelineError::TableFull { table: name, index }),
                    Ok(_) => {}
                    Err(error) => {
                        return Err(PipelineError::Entry {
                            table: name,
                            index,
                            error,
                        })
                    }
                }
            }
        }
        Ok(p)
    }

    /// Loads a spec file and its population files.
    pub fn from_file(path: &Path, seed: Option<u64>) -> Result<Self, PipelineError> {
        let spec = load_pipeline_file(path)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Pipeline::with_entries(spec, dir, seed)
    }

    pub fn spec(&self) -> &PipelineSpec {
        &self.spec
    }

    pub fn parser(&self) -> &ParserProgram {
        &self.parser
    }

    pub fn table(&self, name: &str) -> Option<&MatchTable> {
        self.stages.iter().find(|s| s.name == name).map(|s| &s.table)
    }

    pub fn table_mut(&mut self, name: &str) -> Option<&mut MatchTable> {
        self.stages.iter_mut().find(|s| s.name == name).map(|s| &mut s.table)
    }

    /// Node counts of populated LPM tables, for the cost report.
    pub fn lpm_node_counts(&self) -> BTreeMap<String, u64> {
        self.stages
            .iter()
            .filter_map(|s| match &s.table {
                MatchTable::Lpm(t) if !t.is_empty() => Some((s.name.clone(), t.node_count() as u64)),
                _ => None,
            })
            .collect()
    }

    fn action_index(&self, name: &str) -> usize {
        self.spec
            .actions
            .iter()
            .position(|a| a.name == name)
            .expect("validated action")
    }

    fn apply(&self, pp: &mut ParsedPacket, action: usize, data: &Bits) -> Result<(), DropReason> {
        // Validation guarantees checksum headers are 20 octets, so the only
        // runtime failure is touching an invalid header.
        self.actions[action]
            .execute_in_place(pp, data)
            .map_err(|_| DropReason::InvalidFieldAccess)
    }

    /// Runs parser, tables and actions on one packet.
    pub fn ingress(&self, pkt: &Packet) -> Ingress {
        let mut lookups = Vec::new();
        let outcome = self.ingress_inner(pkt, &mut lookups);
        Ingress { outcome, lookups }
    }

    fn ingress_inner(&self, pkt: &Packet, lookups: &mut Vec<(usize, bool)>) -> Result<Egress, DropReason> {
        if pkt.len() as u64 > self.spec.platform.max_pkt_bytes {
            return Err(DropReason::Oversize);
        }
        let mut pp = parse(pkt, &self.parser)?;
        pp.write(self.egress_port, pkt.ingress_port as u128);
        for (i, stage) in self.stages.iter().enumerate() {
            // A key over an invalid header skips the lookup and takes the miss path.
            let hit = extract_key(&pp, &stage.key, stage.key_width)
                .ok()
                .and_then(|key| stage.table.lookup(&key));
            match hit {
                Some(call) => {
                    lookups.push((i, true));
                    let a = self.action_index(&call.action);
                    self.apply(&mut pp, a, &call.data)?;
                }
                None => {
                    lookups.push((i, false));
                    match &stage.miss {
                        Miss::Continue => {}
                        Miss::Drop => return Err(DropReason::Miss),
                        Miss::Action(a, data) => self.apply(&mut pp, *a, data)?,
                    }
                }
            }
        }
        if pp.read(self.drop) != 0 {
            return Err(DropReason::Action);
        }
        Ok(Egress {
            bytes: deparse(&pp, &self.deparse),
            port: pp.read(self.egress_port) as u16,
            rank: pp.read(self.rank) as u64,
        })
    }

    /// Replays packets in order through the whole pipeline including buffer
    /// and scheduler. One entry is dequeued after every `dequeue_every`
    /// arrivals and the queue drains at the end.
    pub fn run(&self, packets: &[Packet]) -> RunResult {
        let cfg = &self.spec.scheduler;
        let mut buffer = PacketBuffer::new(cfg.buffer_bytes);
        let mut queue = build_scheduler(cfg);
        let mut stats = RunStats::default();
        for s in &self.stages {
            stats.tables.insert(s.name.clone(), TableStats::default());
        }
        let mut outputs = Vec::new();
        for (i, pkt) in packets.iter().enumerate() {
            stats.packets_in += 1;
            let ing = self.ingress(pkt);
            for (s, hit) in ing.lookups {
                let t = stats.tables.get_mut(&self.stages[s].name).expect("stage stats");
                if hit {
                    t.hits += 1;
                } else {
                    t.misses += 1;
                }
            }
            match ing.outcome {
                Err(r) => emit(
                    &mut outputs,
                    &mut stats,
                    pkt.arrival_seq,
                    pkt.ingress_port,
                    Disposition::Dropped(r),
                    Vec::new(),
                ),
                Ok(eg) => match buffer.admit(Packet::new(eg.bytes, pkt.arrival_seq, eg.port)) {
                    Admission::Dropped => emit(
                        &mut outputs,
                        &mut stats,
                        pkt.arrival_seq,
                        eg.port,
                        Disposition::Dropped(DropReason::BufferOverflow),
                        Vec::new(),
                    ),
                    Admission::Stored(h) => {
                        if queue.push(RankedEntry::new(eg.rank, i as u64, h)).is_err() {
                            buffer.release(h).expect("just admitted");
                            emit(
                                &mut outputs,
                                &mut stats,
                                pkt.arrival_seq,
                                eg.port,
                                Disposition::Dropped(DropReason::QueueFull),
                                Vec::new(),
                            );
                        } else {
                            queue.tick();
                            stats.queue_high_water = stats.queue_high_water.max(queue.len());
                        }
                    }
                },
            }
            if (i + 1) % cfg.dequeue_every.max(1) == 0 {
                dequeue(queue.as_mut(), &mut buffer, &mut outputs, &mut stats);
            }
        }
        while dequeue(queue.as_mut(), &mut buffer, &mut outputs, &mut stats) {}
        stats.buffer_high_water_bytes = buffer.high_water();
        RunResult { outputs, stats }
    }
}

fn emit(outputs: &mut Vec<TraceRecord>, stats: &mut RunStats, arrival: u64, port: u16, d: Disposition, bytes: Vec<u8>) {
    match d {
        Disposition::Forwarded => stats.forwarded += 1,
        Disposition::Dropped(r) => *stats.dropped.entry(r.to_string()).or_default() += 1,
    }
    outputs.push(TraceRecord {
        direction: Direction::Out,
        seq: outputs.len() as u64,
        arrival_seq: arrival,
        port,
        disposition: d,
        bytes,
    });
}

fn dequeue(
    queue: &mut (dyn Scheduler + Send),
    buffer: &mut PacketBuffer,
    outputs: &mut Vec<TraceRecord>,
    stats: &mut RunStats,
) -> bool {
    let Some(e) = queue.pop() else { return false };
    queue.tick();
    let pkt = buffer.release(e.pkt).expect("queued handle is buffered");
    emit(
        outputs,
        stats,
        pkt.arrival_seq,
        pkt.ingress_port,
        Disposition::Forwarded,
        pkt.bytes,
    );
    true
}

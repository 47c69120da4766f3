//! Python bindings for `pisa-core`.
//!
//! Keys, masks and action data cross the boundary as Python ints (up to 128
//! bits). Structures that take action data store it as `data_width` bits.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pisa_core::bits::Bits;
use pisa_core::cost;
use pisa_core::pipeline::{Pipeline as CorePipeline, PipelineError};
use pisa_core::sched::{Pifo as CorePifo, RankedEntry, Scheduler, SystolicQueue as CoreSystolic};
use pisa_core::spec::{load_pipeline_file, SpecError};
use pisa_core::tables::{self, ActionCall, ExactEntry, InsertOutcome, TableError};
use pisa_core::trace::{read_input_trace, write_trace};

fn spec_err(e: SpecError) -> PyErr {
    match e {
        SpecError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::Spec(s) => spec_err(s),
        PipelineError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn table_err(e: TableError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits(width: usize, value: u128) -> PyResult<Bits> {
    if width < 128 && value >> width != 0 {
        return Err(PyOverflowError::new_err(format!(
            "{value:#x} does not fit in {width} bits"
        )));
    }
    Ok(Bits::from_u128(width, value))
}

fn outcome_name(o: InsertOutcome) -> &'static str {
    match o {
        InsertOutcome::Inserted => "inserted",
        InsertOutcome::Replaced => "replaced",
        InsertOutcome::Full => "full",
    }
}

/// Loads and validates a spec; returns `(headers, tables)`.
#[pyfunction]
fn validate(path: PathBuf) -> PyResult<(usize, usize)> {
    let s = load_pipeline_file(&path).map_err(spec_err)?;
    Ok((s.headers.len(), s.tables.len()))
}

/// Validation violations as strings; empty when the spec is valid.
#[pyfunction]
fn violations(path: PathBuf) -> PyResult<Vec<String>> {
    match load_pipeline_file(&path) {
        Ok(_) => Ok(Vec::new()),
        Err(SpecError::Invalid(r)) => Ok(r.violations.iter().map(|v| v.to_string()).collect()),
        Err(e) => Err(spec_err(e)),
    }
}

#[pyclass(module = "pisa")]
struct Pipeline {
    inner: CorePipeline,
}

#[pymethods]
impl Pipeline {
    #[new]
    #[pyo3(signature = (path, seed=None))]
    fn new(path: PathBuf, seed: Option<u64>) -> PyResult<Self> {
        let inner = CorePipeline::from_file(&path, seed).map_err(pipeline_err)?;
        Ok(Pipeline { inner })
    }

    /// Replays an input trace; returns `(output_trace, stats_json)`.
    fn run(&self, trace: &str) -> PyResult<(String, String)> {
        let packets = read_input_trace(trace).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let r = self.inner.run(&packets);
        Ok((write_trace(&r.outputs), r.stats.to_json()))
    }

    #[pyo3(signature = (json=false))]
    fn report(&self, json: bool) -> String {
        let r = cost::pipeline_report_with(self.inner.spec(), &self.inner.lpm_node_counts());
        if json {
            r.to_json()
        } else {
            r.to_text()
        }
    }

    fn spec_json(&self) -> String {
        self.inner.spec().to_json()
    }
}

#[pyclass(module = "pisa")]
struct TransposedTcam {
    inner: tables::TransposedTcam,
    data_width: usize,
}

#[pymethods]
impl TransposedTcam {
    #[new]
    #[pyo3(signature = (key_width, capacity, chunk_width, data_width=16))]
    fn new(key_width: usize, capacity: usize, chunk_width: usize, data_width: usize) -> PyResult<Self> {
        if chunk_width == 0 || chunk_width > key_width || chunk_width > 24 {
            return Err(PyValueError::new_err("need 1 <= chunk_width <= min(key_width, 24)"));
        }
        Ok(TransposedTcam {
            inner: tables::TransposedTcam::new(key_width, capacity, chunk_width),
            data_width,
        })
    }

    /// Returns the slot, or `None` when full.
    #[pyo3(signature = (value, mask, priority, data=0))]
    fn insert(&mut self, value: u128, mask: u128, priority: u32, data: u128) -> PyResult<Option<usize>> {
        let w = self.inner.key_width();
        let rule = tables::TernaryRule {
            value: bits(w, value)?,
            mask: bits(w, mask)?,
            priority,
            call: ActionCall::new("", bits(self.data_width, data)?),
        };
        self.inner.insert(rule).map_err(table_err)
    }

    fn remove(&mut self, slot: usize) -> bool {
        self.inner.remove(slot).is_some()
    }

    /// `(slot, data)` of the winning rule.
    fn lookup(&self, key: u128) -> PyResult<Option<(usize, u128)>> {
        let k = bits(self.inner.key_width(), key)?;
        Ok(self.inner.lookup(&k).map(|(s, r)| (s, r.call.data.to_u128())))
    }

    #[getter]
    fn memory_bits(&self) -> u64 {
        self.inner.memory_bits()
    }

    #[getter]
    fn overhead(&self) -> f64 {
        self.inner.overhead()
    }

    #[getter]
    fn chunk_count(&self) -> usize {
        self.inner.chunk_count()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(module = "pisa")]
struct CuckooTable {
    inner: tables::CuckooTable,
    data_width: usize,
}

#[pymethods]
impl CuckooTable {
    #[new]
    #[pyo3(signature = (key_width, capacity, seed=0, data_width=16))]
    fn new(key_width: usize, capacity: usize, seed: u64, data_width: usize) -> Self {
        CuckooTable {
            inner: tables::CuckooTable::with_seed(key_width, capacity, seed),
            data_width,
        }
    }

    /// Returns "inserted", "replaced" or "full".
    #[pyo3(signature = (key, data=0))]
    fn insert(&mut self, key: u128, data: u128) -> PyResult<&'static str> {
        let entry = ExactEntry {
            key: bits(self.inner.key_width(), key)?,
            call: ActionCall::new("", bits(self.data_width, data)?),
        };
        self.inner.insert(entry).map(outcome_name).map_err(table_err)
    }

    fn lookup(&self, key: u128) -> PyResult<Option<u128>> {
        let k = bits(self.inner.key_width(), key)?;
        Ok(self.inner.lookup(&k).map(|c| c.data.to_u128()))
    }

    fn remove(&mut self, key: u128) -> PyResult<Option<u128>> {
        let k = bits(self.inner.key_width(), key)?;
        Ok(self.inner.remove(&k).map(|c| c.data.to_u128()))
    }

    #[getter]
    fn load_factor(&self) -> f64 {
        self.inner.load_factor()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(module = "pisa")]
struct LpmTrie {
    inner: tables::LpmTrie,
    data_width: usize,
}

#[pymethods]
impl LpmTrie {
    #[new]
    #[pyo3(signature = (width, capacity, data_width=16))]
    fn new(width: usize, capacity: usize, data_width: usize) -> Self {
        LpmTrie {
            inner: tables::LpmTrie::new(width, capacity),
            data_width,
        }
    }

    #[pyo3(signature = (value, length, data=0))]
    fn insert(&mut self, value: u128, length: usize, data: u128) -> PyResult<&'static str> {
        let p = tables::Prefix::new(bits(self.inner.width(), value)?, length).map_err(table_err)?;
        let call = ActionCall::new("", bits(self.data_width, data)?);
        self.inner.insert(p, call).map(outcome_name).map_err(table_err)
    }

    /// `(value, length, data)` of the longest matching prefix.
    fn lookup(&self, key: u128) -> PyResult<Option<(u128, usize, u128)>> {
        let k = bits(self.inner.width(), key)?;
        Ok(self
            .inner
            .lookup(&k)
            .map(|(p, c)| (p.bits.to_u128(), p.length, c.data.to_u128())))
    }

    fn remove(&mut self, value: u128, length: usize) -> PyResult<Option<u128>> {
        let p = tables::Prefix::new(bits(self.inner.width(), value)?, length).map_err(table_err)?;
        Ok(self.inner.remove(&p).map(|c| c.data.to_u128()))
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn check_rank(rank_bits: usize, rank: u64) -> PyResult<()> {
    if rank_bits < 64 && rank >> rank_bits != 0 {
        return Err(PyOverflowError::new_err(format!(
            "rank {rank} exceeds {rank_bits} bits"
        )));
    }
    Ok(())
}

/// Push-in first-out queue. Sequence numbers are assigned on push.
#[pyclass(module = "pisa")]
struct Pifo {
    inner: CorePifo,
    rank_bits: usize,
    next_seq: u64,
}

#[pymethods]
impl Pifo {
    #[new]
    #[pyo3(signature = (capacity, rank_bits=16))]
    fn new(capacity: usize, rank_bits: usize) -> Self {
        Pifo {
            inner: CorePifo::new(capacity, rank_bits),
            rank_bits,
            next_seq: 0,
        }
    }

    /// Returns the entry's sequence number.
    fn push(&mut self, rank: u64) -> PyResult<u64> {
        check_rank(self.rank_bits, rank)?;
        let seq = self.next_seq;
        self.inner
            .push(RankedEntry::new(rank, seq, seq))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        self.next_seq += 1;
        Ok(seq)
    }

    /// `(rank, seq)` of the head.
    fn pop(&mut self) -> Option<(u64, u64)> {
        self.inner.pop().map(|e| (e.rank, e.seq))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Cycle-stepped systolic priority queue. Call `step()` at least once
/// between operations for PIFO order.
#[pyclass(module = "pisa")]
struct SystolicQueue {
    inner: CoreSystolic,
    rank_bits: usize,
    next_seq: u64,
}

#[pymethods]
impl SystolicQueue {
    #[new]
    #[pyo3(signature = (capacity, rank_bits=16))]
    fn new(capacity: usize, rank_bits: usize) -> PyResult<Self> {
        if capacity == 0 {
            return Err(PyValueError::new_err("capacity must be at least 1"));
        }
        Ok(SystolicQueue {
            inner: CoreSystolic::new(capacity, rank_bits),
            rank_bits,
            next_seq: 0,
        })
    }

    fn push(&mut self, rank: u64) -> PyResult<u64> {
        check_rank(self.rank_bits, rank)?;
        let seq = self.next_seq;
        self.inner
            .push(RankedEntry::new(rank, seq, seq))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        self.next_seq += 1;
        Ok(seq)
    }

    fn pop(&mut self) -> Option<(u64, u64)> {
        self.inner.pop().map(|e| (e.rank, e.seq))
    }

    /// One compare-swap wave; returns the number of swaps.
    fn step(&mut self) -> usize {
        self.inner.step()
    }

    fn settle(&mut self) -> usize {
        self.inner.settle()
    }

    fn head(&self) -> Option<(u64, u64)> {
        self.inner.head().map(|e| (e.rank, e.seq))
    }

    #[getter]
    fn cycles(&self) -> u64 {
        self.inner.cycles()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn throughput(width_bits: f64, freq_hz: f64) -> f64 {
    cost::throughput(width_bits, freq_hz)
}

#[pyfunction]
fn tcam_overhead_formula(w: u32) -> PyResult<f64> {
    if w == 0 {
        return Err(PyValueError::new_err("w must be at least 1"));
    }
    Ok(cost::tcam_overhead_formula(w))
}

#[pyfunction]
fn tcam_memory_bits(key_width: u64, depth: u64, chunk_width: u32) -> u64 {
    cost::tcam_memory_bits(key_width, depth, chunk_width)
}

#[pyfunction]
fn rtt_buffer_bytes(rtt_s: f64, rate_bps: f64, n_interfaces: u64) -> u64 {
    cost::rtt_buffer_bytes(rtt_s, rate_bps, n_interfaces)
}

/// `(per_port, total)` bytes.
#[pyfunction]
fn replication_buffers(ports: u64, pipes: u64, max_pkt_bytes: u64) -> PyResult<(u64, u64)> {
    if pipes == 0 || ports < pipes {
        return Err(PyValueError::new_err("need 1 <= pipes <= ports"));
    }
    Ok(cost::replication_buffers(ports, pipes, max_pkt_bytes))
}

/// `(hard, soft, ratio)`.
#[pyfunction]
fn tcam_transistors(depth: u64, width: u64) -> (u64, u64, f64) {
    let t = cost::tcam_transistors(depth, width);
    (t.hard, t.soft, t.ratio)
}

#[pyfunction]
fn pifo_cam_bits(flows: u64, rank_bits: u64) -> u64 {
    cost::pifo_cam_bits(flows, rank_bits)
}

#[pymodule]
fn pisa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(violations, m)?)?;
    m.add_class::<Pipeline>()?;
    m.add_class::<TransposedTcam>()?;
    m.add_class::<CuckooTable>()?;
    m.add_class::<LpmTrie>()?;
    m.add_class::<Pifo>()?;
    m.add_class::<SystolicQueue>()?;
    m.add_function(wrap_pyfunction!(throughput, m)?)?;
    m.add_function(wrap_pyfunction!(tcam_overhead_formula, m)?)?;
    m.add_function(wrap_pyfunction!(tcam_memory_bits, m)?)?;
    m.add_function(wrap_pyfunction!(rtt_buffer_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(replication_buffers, m)?)?;
    m.add_function(wrap_pyfunction!(tcam_transistors, m)?)?;
    m.add_function(wrap_pyfunction!(pifo_cam_bits, m)?)?;
    Ok(())
}

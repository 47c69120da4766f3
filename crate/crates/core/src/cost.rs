//! Analytical FPGA mapping cost model.
//!
//! Everything here is closed-form arithmetic over a [`PlatformConfig`] and a
//! [`PipelineSpec`]. Clock frequency is always an input: the default
//! frequency table is a calibration, not a timing prediction.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::spec::{MatchKind, PipelineSpec, TableDecl};

/// Bus width past which the default table lets frequency fall.
pub const FREQ_KNEE_BITS: u32 = 1280;
pub const TARGET_FREQ_HZ: f64 = 500e6;
/// Per-pipeline throughput observed at a 2048-bit bus.
pub const REFERENCE_THROUGHPUT_2048_BPS: f64 = 786e9;

/// Quoted practical transposed-TCAM overhead band for LUT RAM / BRAM depths.
pub const QUOTED_TCAM_OVERHEAD_RANGE: (f64, f64) = (8.4, 65.0);
/// Quoted buffer figures for 100 us RTT at one and twelve 100G interfaces.
pub const QUOTED_RTT_BUFFER_ONE_PORT: u64 = 1_200_000;
pub const QUOTED_RTT_BUFFER_TWELVE_PORTS: u64 = 12_000_000;

pub const HARD_TCAM_TRANSISTORS_PER_BIT: u64 = 16;
pub const SRAM_TRANSISTORS_PER_BIT: u64 = 6;
/// Memory overhead assumed for an SRAM-emulated TCAM in the silicon estimate.
pub const SOFT_TCAM_MEMORY_OVERHEAD: u64 = 10;
pub const REFERENCE_TCAM_BLOCK: (u64, u64) = (48, 128);
pub const QUOTED_TRANSISTOR_RATIO: f64 = 3.8;

/// Range-CAM vs SRAM area overhead measured on flip-flop CAMs, and the
/// factor by which flip-flop CAMs overstate it.
pub const FLIPFLOP_CAM_OVERHEAD: f64 = 20.0;
pub const FLIPFLOP_OVERSTATEMENT: f64 = 3.0;

/// Exact-match tables are provisioned assuming this cuckoo memory efficiency.
pub const EXACT_MATCH_EFFICIENCY: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqPoint {
    pub width_bits: u32,
    pub hz: f64,
}

/// Default calibration: flat 500 MHz up to the knee, then linear down to the
/// frequency that makes a 2048-bit bus carry 786 Gb/s.
pub fn default_freq_table() -> Vec<FreqPoint> {
    vec![
        FreqPoint {
            width_bits: 64,
            hz: TARGET_FREQ_HZ,
        },
        FreqPoint {
            width_bits: FREQ_KNEE_BITS,
            hz: TARGET_FREQ_HZ,
        },
        FreqPoint {
            width_bits: 2048,
            hz: REFERENCE_THROUGHPUT_2048_BPS / 2048.0,
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlatformConfig {
    pub bus_width_bits: u32,
    pub freq_table: Vec<FreqPoint>,
    pub lutram_depth: u64,
    pub bram_depth: u64,
    pub ports: u64,
    pub port_rate_bps: f64,
    pub pipes: u64,
    pub max_pkt_bytes: u64,
    pub rtt_seconds: f64,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        PlatformConfig {
            bus_width_bits: 2048,
            freq_table: default_freq_table(),
            lutram_depth: 32,
            bram_depth: 512,
            ports: 12,
            port_rate_bps: 100e9,
            pipes: 2,
            max_pkt_bytes: 1518,
            rtt_seconds: 100e-6,
        }
    }
}

/// False for NaN as well as for zero and negatives.
fn positive(x: f64) -> bool {
    x > 0.0
}

pub fn is_valid_bus_width(w: u32) -> bool {
    (64..=2048).contains(&w) && w.is_multiple_of(64) && (w / 64).is_power_of_two()
}

impl PlatformConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !is_valid_bus_width(self.bus_width_bits) {
            v.push(format!(
                "bus_width_bits {} is not a power-of-two multiple of 64 in 64..=2048",
                self.bus_width_bits
            ));
        }
        if self.freq_table.is_empty() {
            v.push("freq_table is empty".to_string());
        }
        for p in &self.freq_table {
            if !positive(p.hz) || p.width_bits == 0 {
                v.push(format!(
                    "freq_table point {} bits / {} Hz not positive",
                    p.width_bits, p.hz
                ));
            }
        }
        for pair in self.freq_table.windows(2) {
            if pair[1].width_bits <= pair[0].width_bits {
                v.push("freq_table widths not strictly increasing".to_string());
            }
            if pair[0].width_bits >= FREQ_KNEE_BITS && pair[1].hz > pair[0].hz {
                v.push(format!(
                    "freq_table rises between {} and {} bits (must not increase past {FREQ_KNEE_BITS})",
                    pair[0].width_bits, pair[1].width_bits
                ));
            }
        }
        for (name, d) in [("lutram_depth", self.lutram_depth), ("bram_depth", self.bram_depth)] {
            if d < 2 || !d.is_power_of_two() {
                v.push(format!("{name} {d} is not a power of two >= 2"));
            }
        }
        if self.pipes == 0 || self.ports < self.pipes {
            v.push(format!(
                "need 1 <= pipes <= ports (pipes {}, ports {})",
                self.pipes, self.ports
            ));
        }
        if !positive(self.port_rate_bps) || !positive(self.rtt_seconds) || self.max_pkt_bytes == 0 {
            v.push("port_rate_bps, rtt_seconds and max_pkt_bytes must be positive".to_string());
        }
        v
    }

    /// Frequency at `width`, linearly interpolated and clamped at the ends.
    pub fn frequency_at(&self, width: u32) -> f64 {
        let t = &self.freq_table;
        let first = t[0];
        let last = t[t.len() - 1];
        if width <= first.width_bits {
            return first.hz;
        }
        if width >= last.width_bits {
            return last.hz;
        }
        for pair in t.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if width >= a.width_bits && width <= b.width_bits {
                let f = (width - a.width_bits) as f64 / (b.width_bits - a.width_bits) as f64;
                return a.hz + f * (b.hz - a.hz);
            }
        }
        unreachable!("table is sorted")
    }

    /// True when `width` is not a calibration point of the table.
    pub fn is_interpolated(&self, width: u32) -> bool {
        !self.freq_table.iter().any(|p| p.width_bits == width)
    }
}

/// Streaming throughput of a data-flow pipeline.
pub fn throughput(width_bits: f64, freq_hz: f64) -> f64 {
    width_bits * freq_hz
}

/// Transposed-memory overhead for chunk width `w`: `2^w / w`.
pub fn tcam_overhead_formula(w: u32) -> f64 {
    assert!(w >= 1);
    2f64.powi(w as i32) / w as f64
}

/// Overhead when chunk memories are forced to a primitive's minimum depth.
/// The result does not depend on the table depth.
pub fn tcam_overhead_practical(key_width: u64, _depth: u64, primitive_depth: u64) -> f64 {
    assert!(primitive_depth >= 2 && primitive_depth.is_power_of_two());
    let w = primitive_depth.trailing_zeros() as u64;
    (key_width.div_ceil(w) * primitive_depth) as f64 / key_width as f64
}

/// Emulated memory for a `key_width × depth` TCAM cut into `chunk_width` chunks.
pub fn tcam_memory_bits(key_width: u64, depth: u64, chunk_width: u32) -> u64 {
    key_width.div_ceil(chunk_width as u64) * (1u64 << chunk_width) * depth
}

/// Bytes to cover one RTT of line-rate traffic on `n_interfaces` ports.
pub fn rtt_buffer_bytes(rtt_s: f64, rate_bps: f64, n_interfaces: u64) -> u64 {
    let bytes = n_interfaces as f64 * rtt_s * rate_bps / 8.0;
    // Products of decimal inputs land a few ulps off whole numbers.
    let nearest = bytes.round();
    if (bytes - nearest).abs() <= nearest.abs() * 1e-12 {
        nearest as u64
    } else {
        bytes.ceil() as u64
    }
}

/// Dispatcher buffers for pipeline replication: per-port and total bytes.
pub fn replication_buffers(ports: u64, pipes: u64, max_pkt_bytes: u64) -> (u64, u64) {
    assert!(pipes >= 1 && ports >= pipes);
    let per_port = ports.div_ceil(pipes) * max_pkt_bytes;
    (per_port, 2 * ports * per_port)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransistorCount {
    pub depth: u64,
    pub width: u64,
    pub hard: u64,
    pub soft: u64,
    pub ratio: f64,
}

/// Hard (16T cell) vs SRAM-emulated TCAM transistor counts. Priority encoder
/// cost is left out.
pub fn tcam_transistors(depth: u64, width: u64) -> TransistorCount {
    let bits = depth * width;
    let hard = bits * HARD_TCAM_TRANSISTORS_PER_BIT;
    let soft = bits * SOFT_TCAM_MEMORY_OVERHEAD * SRAM_TRANSISTORS_PER_BIT;
    TransistorCount {
        depth,
        width,
        hard,
        soft,
        ratio: soft as f64 / hard as f64,
    }
}

/// Range-search CAM bits for a PIFO: a (lo, hi) rank pair per flow.
pub fn pifo_cam_bits(flows: u64, rank_bits: u64) -> u64 {
    flows * rank_bits * 2
}

/// Exact-match provisioning: `N × (W + data)` divided by the cuckoo efficiency.
pub fn exact_match_bits(capacity: u64, key_width: u64, data_bits: u64) -> u64 {
    // Integer form of dividing by 0.8.
    (capacity * (key_width + data_bits) * 5).div_ceil(4)
}

/// Bits per binary-trie node: two child pointers, an entry flag, an action
/// index and action data.
pub fn lpm_node_bits(max_nodes: u64, n_actions: u64, data_bits: u64) -> u64 {
    let ptr = bits_for(max_nodes + 1);
    let act = bits_for(n_actions.max(1));
    2 * ptr + 1 + act + data_bits
}

fn bits_for(count: u64) -> u64 {
    if count <= 1 {
        1
    } else {
        64 - (count - 1).leading_zeros() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableCost {
    pub name: String,
    pub kind: MatchKind,
    pub key_width: u64,
    pub capacity: u64,
    pub data_bits: u64,
    pub memory_bits: u64,
    /// `memory_bits / (capacity × key_width)`; absent for keyless tables.
    pub overhead_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ternary: Option<TernaryCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lpm_nodes: Option<LpmNodes>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TernaryCost {
    pub chunk_width: u32,
    pub chunks: u64,
    pub formula_overhead: f64,
    pub practical_overhead_lutram: f64,
    pub practical_overhead_bram: f64,
    pub quoted_overhead_range: (f64, f64),
    pub transistors: TransistorCount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpmNodes {
    pub count: u64,
    /// True when `count` is the `1 + capacity × W` bound rather than a
    /// populated trie.
    pub bound: bool,
    pub node_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Throughput {
    pub bus_width_bits: u32,
    pub frequency_hz: f64,
    pub frequency_interpolated: bool,
    pub per_pipe_bps: f64,
    pub pipes: u64,
    pub aggregate_bps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Buffers {
    pub rtt_seconds: f64,
    pub port_rate_bps: f64,
    pub ports: u64,
    pub rtt_one_port_bytes: u64,
    pub rtt_all_ports_bytes: u64,
    pub quoted_rtt_one_port_bytes: u64,
    pub quoted_rtt_twelve_ports_bytes: u64,
    pub replication_per_port_bytes: u64,
    pub replication_total_bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchedulerCost {
    pub flows: u64,
    pub rank_bits: u64,
    pub pifo_cam_bits: u64,
    pub flipflop_cam_overhead: f64,
    pub effective_cam_overhead: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub name: String,
    pub throughput: Throughput,
    pub tables: Vec<TableCost>,
    pub total_table_bits: u64,
    pub buffers: Buffers,
    pub reference_tcam: TransistorCount,
    pub quoted_transistor_ratio: f64,
    pub scheduler: SchedulerCost,
    pub notes: Vec<String>,
}

fn table_data_bits(spec: &PipelineSpec, t: &TableDecl) -> u64 {
    t.actions
        .iter()
        .filter_map(|a| spec.action(a))
        .map(|a| a.data_bits() as u64)
        .max()
        .unwrap_or(0)
}

/// Cost report with LPM tables sized by their worst-case node bound.
pub fn pipeline_report(spec: &PipelineSpec) -> CostReport {
    pipeline_report_with(spec, &BTreeMap::new())
}

/// Cost report using observed trie node counts where provided.
pub fn pipeline_report_with(spec: &PipelineSpec, lpm_nodes: &BTreeMap<String, u64>) -> CostReport {
    let p = &spec.platform;
    let freq = p.frequency_at(p.bus_width_bits);
    let per_pipe = throughput(p.bus_width_bits as f64, freq);
    let interpolated = p.is_interpolated(p.bus_width_bits);

    let mut tables = Vec::new();
    for t in &spec.tables {
        let w = t.key_width as u64;
        let n = t.capacity as u64;
        let data = table_data_bits(spec, t);
        let mut cost = TableCost {
            name: t.name.clone(),
            kind: t.kind,
            key_width: w,
            capacity: n,
            data_bits: data,
            memory_bits: 0,
            overhead_ratio: None,
            ternary: None,
            lpm_nodes: None,
        };
        match t.kind {
            MatchKind::Exact => {
                if w > 0 {
                    cost.memory_bits = exact_match_bits(n, w, data);
                }
            }
            MatchKind::Ternary => {
                let cw = t.chunk_width.unwrap_or(1) as u32;
                cost.memory_bits = tcam_memory_bits(w, n, cw);
                cost.ternary = Some(TernaryCost {
                    chunk_width: cw,
                    chunks: w.div_ceil(cw as u64),
                    formula_overhead: tcam_overhead_formula(cw),
                    practical_overhead_lutram: tcam_overhead_practical(w, n, p.lutram_depth),
                    practical_overhead_bram: tcam_overhead_practical(w, n, p.bram_depth),
                    quoted_overhead_range: QUOTED_TCAM_OVERHEAD_RANGE,
                    transistors: tcam_transistors(n, w),
                });
            }
            MatchKind::Lpm => {
                let bound = 1 + n * w;
                let (count, is_bound) = match lpm_nodes.get(&t.name) {
                    Some(c) => (*c, false),
                    None => (bound, true),
                };
                let node_bits = lpm_node_bits(bound, t.actions.len() as u64, data);
                cost.memory_bits = count * node_bits;
                cost.lpm_nodes = Some(LpmNodes {
                    count,
                    bound: is_bound,
                    node_bits,
                });
            }
        }
        if w > 0 {
            cost.overhead_ratio = Some(cost.memory_bits as f64 / (n * w) as f64);
        }
        tables.push(cost);
    }
    let total_table_bits = tables.iter().map(|t| t.memory_bits).sum();

    let (rep_port, rep_total) = replication_buffers(p.ports, p.pipes, p.max_pkt_bytes);
    let buffers = Buffers {
        rtt_seconds: p.rtt_seconds,
        port_rate_bps: p.port_rate_bps,
        ports: p.ports,
        rtt_one_port_bytes: rtt_buffer_bytes(p.rtt_seconds, p.port_rate_bps, 1),
        rtt_all_ports_bytes: rtt_buffer_bytes(p.rtt_seconds, p.port_rate_bps, p.ports),
        quoted_rtt_one_port_bytes: QUOTED_RTT_BUFFER_ONE_PORT,
        quoted_rtt_twelve_ports_bytes: QUOTED_RTT_BUFFER_TWELVE_PORTS,
        replication_per_port_bytes: rep_port,
        replication_total_bytes: rep_total,
    };

    let flows = spec.scheduler.capacity_entries as u64;
    let rank_bits = spec.scheduler.rank_bits as u64;
    let scheduler = SchedulerCost {
        flows,
        rank_bits,
        pifo_cam_bits: pifo_cam_bits(flows, rank_bits),
        flipflop_cam_overhead: FLIPFLOP_CAM_OVERHEAD,
        effective_cam_overhead: FLIPFLOP_CAM_OVERHEAD / FLIPFLOP_OVERSTATEMENT,
    };

    let mut notes = Vec::new();
    if interpolated {
        notes.push(format!(
            "frequency {:.0} Hz at {} bits is interpolated from the calibration table",
            freq, p.bus_width_bits
        ));
    }
    notes.push(
        "frequency is a calibration input (500 MHz target to 1280 bits, linear to 786 Gb/s at 2048 bits), not a timing prediction"
            .to_string(),
    );
    notes.push("logic resources grow linearly with bus width; absolute LUT/FF/BRAM counts are not modeled".to_string());
    notes.push(
        "the deparser is expected to dominate resources (over 80% once the header stack grows); not computed"
            .to_string(),
    );
    if tables.iter().any(|t| t.kind == MatchKind::Ternary) {
        notes.push(format!(
            "ternary overhead: formula 2^w/w and ceil-chunked practical values shown next to the quoted {}x-{}x band, whose lower end is unexplained by the formula",
            QUOTED_TCAM_OVERHEAD_RANGE.0, QUOTED_TCAM_OVERHEAD_RANGE.1
        ));
    }
    notes.push(format!(
        "RTT buffer: formula gives {} B for one port and {} B for {} ports; quoted figures are {} B and {} B (12 x 100G); formula values are authoritative",
        buffers.rtt_one_port_bytes,
        rtt_buffer_bytes(p.rtt_seconds, p.port_rate_bps, 12),
        12,
        QUOTED_RTT_BUFFER_ONE_PORT,
        QUOTED_RTT_BUFFER_TWELVE_PORTS
    ));
    notes.push(format!(
        "range-search CAM: flip-flop overhead of {}x vs SRAM is overstated by {}x, effective {:.1}x",
        FLIPFLOP_CAM_OVERHEAD, FLIPFLOP_OVERSTATEMENT, scheduler.effective_cam_overhead
    ));
    notes.push("functional model runs packets to completion; bus segmentation affects cost figures only".to_string());

    let (d, w) = REFERENCE_TCAM_BLOCK;
    CostReport {
        name: spec.name.clone(),
        throughput: Throughput {
            bus_width_bits: p.bus_width_bits,
            frequency_hz: freq,
            frequency_interpolated: interpolated,
            per_pipe_bps: per_pipe,
            pipes: p.pipes,
            aggregate_bps: per_pipe * p.pipes as f64,
        },
        tables,
        total_table_bits,
        buffers,
        reference_tcam: tcam_transistors(d, w),
        quoted_transistor_ratio: QUOTED_TRANSISTOR_RATIO,
        scheduler,
        notes,
    }
}

impl CostReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k:<34} {v}");
        };
        let t = &self.throughput;
        line("pipeline", self.name.clone());
        line("bus width (bits)", t.bus_width_bits.to_string());
        line(
            "frequency (Hz)",
            format!(
                "{:.0}{}",
                t.frequency_hz,
                if t.frequency_interpolated {
                    " (interpolated)"
                } else {
                    ""
                }
            ),
        );
        line("throughput per pipe (Gb/s)", format!("{:.3}", t.per_pipe_bps / 1e9));
        line("pipes", t.pipes.to_string());
        line("throughput aggregate (Gb/s)", format!("{:.3}", t.aggregate_bps / 1e9));
        for tc in &self.tables {
            line(
                &format!("table {} ({})", tc.name, tc.kind),
                format!(
                    "{} bits{}",
                    tc.memory_bits,
                    tc.overhead_ratio
                        .map(|r| format!(", overhead {r:.3}x"))
                        .unwrap_or_default()
                ),
            );
            if let Some(tern) = &tc.ternary {
                line(
                    "  chunks x width",
                    format!("{} x {} bits", tern.chunks, tern.chunk_width),
                );
                line("  formula overhead 2^w/w", format!("{:.3}x", tern.formula_overhead));
                line(
                    "  practical lutram / bram",
                    format!(
                        "{:.3}x / {:.3}x",
                        tern.practical_overhead_lutram, tern.practical_overhead_bram
                    ),
                );
                line(
                    "  quoted range",
                    format!("{}x - {}x", tern.quoted_overhead_range.0, tern.quoted_overhead_range.1),
                );
                line(
                    "  transistors hard / soft",
                    format!("{} / {}", tern.transistors.hard, tern.transistors.soft),
                );
            }
            if let Some(n) = &tc.lpm_nodes {
                line(
                    "  trie nodes",
                    format!(
                        "{}{} x {} bits",
                        n.count,
                        if n.bound { " (bound)" } else { "" },
                        n.node_bits
                    ),
                );
            }
        }
        line("total table bits", self.total_table_bits.to_string());
        let b = &self.buffers;
        line("rtt buffer, one port (B)", b.rtt_one_port_bytes.to_string());
        line(
            &format!("rtt buffer, {} ports (B)", b.ports),
            b.rtt_all_ports_bytes.to_string(),
        );
        line(
            "quoted rtt buffer 1 / 12 ports (B)",
            format!("{} / {}", b.quoted_rtt_one_port_bytes, b.quoted_rtt_twelve_ports_bytes),
        );
        line("replication per port (B)", b.replication_per_port_bytes.to_string());
        line("replication total (B)", b.replication_total_bytes.to_string());
        let r = &self.reference_tcam;
        line(
            &format!("tcam {}x{} transistors hard", r.depth, r.width),
            r.hard.to_string(),
        );
        line(
            &format!("tcam {}x{} transistors soft", r.depth, r.width),
            r.soft.to_string(),
        );
        line(
            "soft / hard ratio",
            format!("{:.2} (quoted {})", r.ratio, self.quoted_transistor_ratio),
        );
        let sc = &self.scheduler;
        line(
            "pifo range cam bits",
            format!("{} ({} x ({} x 2))", sc.pifo_cam_bits, sc.flows, sc.rank_bits),
        );
        line(
            "range cam overhead vs sram",
            format!(
                "{:.1}x flip-flop, {:.1}x effective",
                sc.flipflop_cam_overhead, sc.effective_cam_overhead
            ),
        );
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        s
    }
}

/// CSV sweep of bus widths 64..=2048 in steps of 64. The resource column is
/// a unitless proxy that grows linearly with width.
pub fn bus_sweep_csv(platform: &PlatformConfig) -> String {
    let mut s = String::from("bus_width_bits,frequency_hz,throughput_bps,resource_proxy,interpolated\n");
    for w in (64..=2048).step_by(64) {
        let f = platform.frequency_at(w);
        let _ = writeln!(
            s,
            "{},{:.1},{:.1},{},{}",
            w,
            f,
            throughput(w as f64, f),
            w / 64,
            platform.is_interpolated(w)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_products() {
        assert_eq!(throughput(64.0, 500e6), 32e9);
        assert_eq!(throughput(0.0, 500e6), 0.0);
        let f = PlatformConfig::default().frequency_at(2048);
        assert!((throughput(2048.0, f) - 786e9).abs() < 1.0);
        assert!((throughput(2048.0, 383_789_063.0) / 1e9 - 786.0).abs() < 0.01);
    }

    #[test]
    fn overhead_formula_values() {
        assert_eq!(tcam_overhead_formula(1), 2.0);
        assert_eq!(tcam_overhead_formula(2), 2.0);
        assert_eq!(tcam_overhead_formula(5), 6.4);
        assert_eq!(tcam_overhead_practical(128, 4096, 32), 6.5);
        assert_eq!(tcam_overhead_practical(128, 7, 512), 60.0);
        assert!((tcam_overhead_practical(126, 512, 512) - 14.0 * 512.0 / 126.0).abs() < 1e-12);
        assert_eq!(tcam_memory_bits(128, 4096, 5), 3_407_872);
        assert_eq!(tcam_memory_bits(126, 512, 9), 14 * 512 * 512);
    }

    #[test]
    fn overhead_formula_shape() {
        for w in 3..20 {
            assert!(tcam_overhead_formula(w + 1) > tcam_overhead_formula(w));
            assert!(tcam_overhead_formula(w) > 2.0);
        }
    }

    #[test]
    fn rtt_buffers() {
        assert_eq!(rtt_buffer_bytes(100e-6, 100e9, 1), 1_250_000);
        assert_eq!(rtt_buffer_bytes(100e-6, 100e9, 12), 15_000_000);
        assert_eq!(rtt_buffer_bytes(1e-9, 8.0, 1), 1);
        assert_eq!(rtt_buffer_bytes(1.0, 12.0, 1), 2);
    }

    #[test]
    fn replication() {
        assert_eq!(replication_buffers(12, 2, 1518), (9_108, 218_592));
        assert_eq!(replication_buffers(1, 1, 1518), (1_518, 3_036));
        assert_eq!(replication_buffers(12, 12, 9000), (9_000, 216_000));
        assert_eq!(replication_buffers(5, 2, 100), (300, 3_000));
    }

    #[test]
    fn transistors_and_cam() {
        let t = tcam_transistors(48, 128);
        assert_eq!((t.hard, t.soft, t.ratio), (98_304, 368_640, 3.75));
        let u = tcam_transistors(1, 1);
        assert_eq!((u.hard, u.soft), (16, 60));
        assert_eq!(pifo_cam_bits(1024, 16), 32_768);
        assert_eq!(pifo_cam_bits(1, 1), 2);
    }

    #[test]
    fn exact_match_divisor() {
        assert_eq!(exact_match_bits(65536, 128, 16), 11_796_480);
        assert_eq!(exact_match_bits(1, 1, 0), 2);
    }

    #[test]
    fn default_platform_is_valid() {
        assert!(PlatformConfig::default().violations().is_empty());
        let mut p = PlatformConfig {
            bus_width_bits: 1280,
            ..Default::default()
        };
        assert_eq!(p.violations().len(), 1);
        p.bus_width_bits = 64;
        p.freq_table.push(FreqPoint {
            width_bits: 4096,
            hz: 600e6,
        });
        assert_eq!(p.violations().len(), 1);
    }

    #[test]
    fn interpolation() {
        let p = PlatformConfig::default();
        assert_eq!(p.frequency_at(1024), 500e6);
        assert!(p.is_interpolated(1024));
        assert!(!p.is_interpolated(2048));
        let mid = p.frequency_at(1664);
        assert!((mid - (500e6 + p.frequency_at(2048)) / 2.0).abs() < 1e-3);
    }

    #[test]
    fn sweep_peaks_at_widest_bus() {
        let csv = bus_sweep_csv(&PlatformConfig::default());
        let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 32);
        let best = rows
            .iter()
            .max_by(|a, b| a[2].parse::<f64>().unwrap().total_cmp(&b[2].parse().unwrap()))
            .unwrap();
        assert_eq!(best[0], "2048");
        assert!((best[2].parse::<f64>().unwrap() - 786e9).abs() < 1.0);
    }
}

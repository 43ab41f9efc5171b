use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::index::LogIndex;
use super::{Distribution, PropagationStats, RunMetrics, SizeStats};
use crate::hash::Hash;
use crate::simnet::{MsgKind, RelayStrategy};

/// Bumped whenever a CSV column or summary field changes meaning.
pub const METRICS_SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "block,finder,height,metric,value";

/// Per-block facts, written as one CSV row per metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub block: Hash,
    pub finder: u32,
    pub height: u64,
    pub found_at: f64,
    pub on_final_chain: bool,
    pub size_bytes: u64,
    pub txs: u32,
    pub adopted_nodes: usize,
    pub mean_latency: Option<f64>,
    pub max_latency: Option<f64>,
    pub critical_path_bytes: Option<u64>,
}

impl BlockRow {
    fn metrics(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("found_at", self.found_at.to_string()),
            ("on_final_chain", u8::from(self.on_final_chain).to_string()),
            ("size_bytes", self.size_bytes.to_string()),
            ("txs", self.txs.to_string()),
            ("adopted_nodes", self.adopted_nodes.to_string()),
        ];
        if let Some(v) = self.mean_latency {
            out.push(("latency_mean_secs", v.to_string()));
        }
        if let Some(v) = self.max_latency {
            out.push(("latency_max_secs", v.to_string()));
        }
        if let Some(v) = self.critical_path_bytes {
            out.push(("critical_path_bytes", v.to_string()));
        }
        out
    }
}

pub(crate) fn block_rows(ix: &LogIndex, latency: &PropagationStats, sizes: &SizeStats) -> Vec<BlockRow> {
    let critical: BTreeMap<Hash, u64> = sizes.critical_path.iter().copied().collect();
    ix.blocks
        .iter()
        .enumerate()
        .zip(&latency.blocks)
        .map(|((i, b), lat)| {
            let samples: Vec<f64> = lat.samples.iter().map(|(_, s)| *s).collect();
            let dist = Distribution::of(&samples);
            BlockRow {
                block: b.hash,
                finder: b.finder,
                height: b.height,
                found_at: b.found_at,
                on_final_chain: ix.final_chain.contains(&i),
                size_bytes: b.size,
                txs: b.txs,
                adopted_nodes: samples.len(),
                mean_latency: dist.map(|d| d.mean),
                max_latency: dist.map(|d| d.max),
                critical_path_bytes: critical.get(&b.hash).copied(),
            }
        })
        .collect()
}

/// Tidy CSV: `block,finder,height,metric,value`, one row per block per metric.
pub fn write_blocks_csv<W: Write>(rows: &[BlockRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        for (metric, value) in row.metrics() {
            writeln!(out, "{},{},{},{metric},{value}", row.block, row.finder, row.height)?;
        }
    }
    out.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub strategy: Option<RelayStrategy>,
    pub seed: Option<u64>,
    pub node_count: u32,
    pub horizon_secs: f64,
    pub blocks_found: usize,
    pub stale_rate: Option<f64>,
    /// Tip-adoption latency over every (block, adopting node) pair.
    pub latency: Option<Distribution>,
    pub wasted_fraction: f64,
    pub wasted_secs_per_node: Vec<f64>,
    pub bytes_per_family: BTreeMap<MsgKind, u64>,
    pub bytes_total: u64,
    pub critical_path_bytes_mean: Option<f64>,
    pub critical_path_bytes_max: Option<u64>,
    pub notes: Vec<String>,
}

impl Summary {
    pub fn new(metrics: &RunMetrics, log_start: Option<(u32, f64, RelayStrategy, u64)>) -> Summary {
        let (node_count, horizon_secs, strategy, seed) = match log_start {
            Some((n, h, s, seed)) => (n, h, Some(s), Some(seed)),
            None => (0, 0.0, None, None),
        };
        Summary {
            schema_version: METRICS_SCHEMA_VERSION,
            strategy,
            seed,
            node_count,
            horizon_secs,
            blocks_found: metrics.blocks_found,
            stale_rate: metrics.stale_rate,
            latency: metrics.latency.summary,
            wasted_fraction: metrics.waste.fraction,
            wasted_secs_per_node: metrics.waste.per_node.iter().map(|n| n.wasted_secs).collect(),
            bytes_per_family: metrics.sizes.per_family.clone(),
            bytes_total: metrics.sizes.total,
            critical_path_bytes_mean: metrics.sizes.mean_critical_path(),
            critical_path_bytes_max: metrics.sizes.critical_path.iter().map(|(_, b)| *b).max(),
            notes: vec![
                "latency samples exclude nodes that never adopted a block".into(),
                "the finder contributes a zero latency sample".into(),
                "waste is measured against the final best chain in hindsight".into(),
            ],
        }
    }
}

//! Comparative measurements over simulator event logs.
//!
//! Every function here is a pure function of an [`EventLog`], so metrics
//! recomputed from a saved `events.ndjson` match the live run exactly.
//!
//! Definitions:
//!
//! * The final best chain ends at the highest block found during the run.
//!   Ties go to the block most nodes ended on, then the earliest found.
//! * A node adopts a block the first time it is on the node's active chain,
//!   either as the tip or as an ancestor of a newly adopted tip. The finder
//!   contributes a zero sample. Nodes that never adopt a block contribute
//!   no sample for it.
//! * Mining time is wasted when its parent is off the final chain, or once
//!   the final chain's child of that parent has been found elsewhere.
//! * The post-mine critical path of a block is, for the worst receiving
//!   node, the bytes of block-specific messages (full block, seed, its
//!   advert) plus transaction responses sent to it between the find and its
//!   adoption. Duplicate copies of the same message count once.

mod index;
mod report;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::hash::Hash;
use crate::simnet::{EventLog, MsgKind};
use index::LogIndex;

pub use report::{write_blocks_csv, BlockRow, Summary, CSV_HEADER, METRICS_SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

impl Distribution {
    /// Nearest-rank percentiles. `None` for an empty sample.
    pub fn of(samples: &[f64]) -> Option<Distribution> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |p: f64| sorted[((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1];
        Some(Distribution {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: rank(0.5),
            p90: rank(0.9),
            max: sorted[sorted.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockLatency {
    pub block: Hash,
    pub finder: u32,
    /// `(node, seconds)` for every node that adopted the block.
    pub samples: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationStats {
    pub blocks: Vec<BlockLatency>,
    /// Over all samples of all blocks; `None` when there are none.
    pub summary: Option<Distribution>,
}

impl PropagationStats {
    pub fn is_empty(&self) -> bool {
        self.summary.is_none()
    }

    pub fn all_samples(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.samples.iter().map(|(_, s)| *s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeWaste {
    pub node: u32,
    pub mining_secs: f64,
    pub wasted_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WasteStats {
    pub per_node: Vec<NodeWaste>,
    /// Total wasted over total mining time; 0 when nothing was mined.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub per_family: BTreeMap<MsgKind, u64>,
    pub total: u64,
    /// `(block, bytes)` in find order, for blocks some other node adopted.
    pub critical_path: Vec<(Hash, u64)>,
}

impl SizeStats {
    pub fn mean_critical_path(&self) -> Option<f64> {
        if self.critical_path.is_empty() {
            return None;
        }
        Some(self.critical_path.iter().map(|(_, b)| *b as f64).sum::<f64>() / self.critical_path.len() as f64)
    }
}

pub fn propagation_latency(log: &EventLog) -> PropagationStats {
    latency_from(&LogIndex::build(log))
}

/// Share of found blocks that are not on the final best chain.
pub fn stale_rate(log: &EventLog) -> Option<f64> {
    stale_from(&LogIndex::build(log))
}

pub fn wasted_hashpower(log: &EventLog) -> WasteStats {
    waste_from(&LogIndex::build(log))
}

pub fn size_report(log: &EventLog) -> SizeStats {
    sizes_from(&LogIndex::build(log))
}

fn latency_from(ix: &LogIndex) -> PropagationStats {
    let blocks: Vec<BlockLatency> = ix
        .blocks
        .iter()
        .zip(&ix.adopted)
        .map(|(b, adopted)| BlockLatency {
            block: b.hash,
            finder: b.finder,
            samples: adopted
                .iter()
                .enumerate()
                .filter_map(|(node, t)| t.map(|t| (node as u32, (t - b.found_at).max(0.0))))
                .collect(),
        })
        .collect();
    let all: Vec<f64> = blocks.iter().flat_map(|b| b.samples.iter().map(|(_, s)| *s)).collect();
    PropagationStats { summary: Distribution::of(&all), blocks }
}

fn stale_from(ix: &LogIndex) -> Option<f64> {
    if ix.blocks.is_empty() {
        return None;
    }
    Some((ix.blocks.len() - ix.final_chain.len()) as f64 / ix.blocks.len() as f64)
}

fn waste_from(ix: &LogIndex) -> WasteStats {
    let superseded = ix.superseded_at();
    let per_node: Vec<NodeWaste> = ix
        .mining
        .iter()
        .enumerate()
        .map(|(node, intervals)| {
            let mut mining_secs = 0.0;
            let mut wasted_secs = 0.0;
            for &(start, end, parent) in intervals {
                let len = end - start;
                mining_secs += len;
                if !ix.on_final_chain(&parent) {
                    wasted_secs += len;
                } else if let Some(&t) = superseded.get(&parent) {
                    wasted_secs += (end - t.max(start)).max(0.0);
                }
            }
            NodeWaste { node: node as u32, mining_secs, wasted_secs }
        })
        .collect();
    let total: f64 = per_node.iter().map(|n| n.mining_secs).sum();
    let wasted: f64 = per_node.iter().map(|n| n.wasted_secs).sum();
    let fraction = if total > 0.0 { (wasted / total).clamp(0.0, 1.0) } else { 0.0 };
    WasteStats { per_node, fraction }
}

fn sizes_from(ix: &LogIndex) -> SizeStats {
    let critical_path = ix
        .blocks
        .iter()
        .zip(&ix.adopted)
        .filter_map(|(b, adopted)| {
            // The advert the finder issued for this parent most recently before the find.
            let advert = ix
                .adverts
                .get(&(b.finder, b.parent))
                .and_then(|ids| ids.iter().rev().find(|(t, _)| *t <= b.found_at))
                .map(|(_, id)| *id);
            let relevant = |msg: MsgKind, id: &Hash| match msg {
                MsgKind::FullBlock | MsgKind::BlockSeed => *id == b.hash,
                MsgKind::Advert => Some(*id) == advert,
                MsgKind::TxResponse => true,
                _ => false,
            };
            adopted
                .iter()
                .enumerate()
                .filter(|(node, _)| *node != b.finder as usize)
                .filter_map(|(node, t)| Some((node, (*t)?)))
                .map(|(node, adopted_at)| {
                    let sends = &ix.sends_to[node];
                    let from = sends.partition_point(|s| s.t < b.found_at);
                    // Redundant copies from other neighbors are not on the path.
                    let mut counted = HashSet::new();
                    sends[from..]
                        .iter()
                        .take_while(|s| s.t <= adopted_at)
                        .filter(|s| s.deliver_at <= adopted_at && relevant(s.msg, &s.id))
                        .filter(|s| counted.insert((s.msg, s.id)))
                        .map(|s| s.size)
                        .sum::<u64>()
                })
                .max()
                .map(|bytes| (b.hash, bytes))
        })
        .collect();
    SizeStats {
        total: ix.send_totals.values().sum(),
        per_family: MsgKind::ALL.iter().map(|k| (*k, ix.send_totals.get(k).copied().unwrap_or(0))).collect(),
        critical_path,
    }
}

/// All metrics of one run, computed from a single pass over the log.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub latency: PropagationStats,
    pub stale_rate: Option<f64>,
    pub waste: WasteStats,
    pub sizes: SizeStats,
    pub rows: Vec<BlockRow>,
    pub blocks_found: usize,
}

pub fn analyze(log: &EventLog) -> RunMetrics {
    let ix = LogIndex::build(log);
    let latency = latency_from(&ix);
    let sizes = sizes_from(&ix);
    let rows = report::block_rows(&ix, &latency, &sizes);
    RunMetrics {
        stale_rate: stale_from(&ix),
        waste: waste_from(&ix),
        blocks_found: ix.blocks.len(),
        latency,
        sizes,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let d = Distribution::of(&[5.0, 1.0, 3.0, 2.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0]).unwrap();
        assert_eq!((d.count, d.mean, d.median, d.p90, d.max), (10, 5.5, 5.0, 9.0, 10.0));
        assert_eq!(Distribution::of(&[0.25]).unwrap().p90, 0.25);
        assert!(Distribution::of(&[]).is_none());
    }
}

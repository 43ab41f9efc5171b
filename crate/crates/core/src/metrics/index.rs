use std::collections::{BTreeMap, HashMap, HashSet};

use crate::hash::Hash;
use crate::simnet::{EventLog, LogRecord, MsgKind};

#[derive(Debug, Clone)]
pub(crate) struct FoundBlock {
    pub hash: Hash,
    pub finder: u32,
    pub parent: Hash,
    pub height: u64,
    pub found_at: f64,
    pub size: u64,
    pub txs: u32,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SendRec {
    pub t: f64,
    pub deliver_at: f64,
    pub msg: MsgKind,
    pub size: u64,
    pub id: Hash,
}

/// Everything the metrics need, extracted from a log in one pass.
#[derive(Debug, Default)]
pub(crate) struct LogIndex {
    pub node_count: usize,
    pub horizon: f64,
    /// Found blocks in log order.
    pub blocks: Vec<FoundBlock>,
    pub by_hash: HashMap<Hash, usize>,
    /// `adopted[b][node]`: first time block `b` was on the node's active chain.
    pub adopted: Vec<Vec<Option<f64>>>,
    pub final_tips: Vec<Option<Hash>>,
    /// Indices into `blocks` of the final best chain.
    pub final_chain: HashSet<usize>,
    /// Per node, `(start, parent)` of each mining interval and the time it ended.
    pub mining: Vec<Vec<(f64, f64, Hash)>>,
    pub sends_to: Vec<Vec<SendRec>>,
    pub send_totals: BTreeMap<MsgKind, u64>,
    /// `(node, prev)` to the advert ids that node issued, with issue times.
    pub adverts: HashMap<(u32, Hash), Vec<(f64, Hash)>>,
}

impl LogIndex {
    pub fn build(log: &EventLog) -> LogIndex {
        let mut ix = LogIndex::default();
        if let Some((nodes, horizon, _, _)) = log.start() {
            ix.node_count = nodes as usize;
            ix.horizon = horizon;
        }
        if let Some(h) = log.horizon() {
            ix.horizon = h;
        }
        let n = ix.node_count;
        ix.final_tips = vec![None; n];
        ix.mining = vec![Vec::new(); n];
        ix.sends_to = vec![Vec::new(); n];
        let mut open: Vec<Option<(f64, Hash)>> = vec![None; n];
        // Per node, blocks already known to be on (or once on) its active chain.
        let mut marked: Vec<HashSet<Hash>> = vec![HashSet::new(); n];

        for record in log.iter() {
            match record {
                LogRecord::BlockFound { t, node, block, parent, height, txs, size } => {
                    ix.by_hash.insert(*block, ix.blocks.len());
                    ix.blocks.push(FoundBlock {
                        hash: *block,
                        finder: *node,
                        parent: *parent,
                        height: *height,
                        found_at: *t,
                        size: *size,
                        txs: *txs,
                    });
                    ix.adopted.push(vec![None; n]);
                }
                LogRecord::TipChanged { t, node, tip, .. } => {
                    let node = *node as usize;
                    ix.final_tips[node] = Some(*tip);
                    let mut cursor = *tip;
                    while let Some(&b) = ix.by_hash.get(&cursor) {
                        if !marked[node].insert(cursor) {
                            break;
                        }
                        ix.adopted[b][node] = Some(*t);
                        cursor = ix.blocks[b].parent;
                    }
                }
                LogRecord::MiningStarted { t, node, parent, .. } => {
                    let node = *node as usize;
                    if let Some((start, p)) = open[node].replace((*t, *parent)) {
                        ix.mining[node].push((start, *t, p));
                    }
                }
                LogRecord::MiningStopped { t, node } => {
                    let node = *node as usize;
                    if let Some((start, p)) = open[node].take() {
                        ix.mining[node].push((start, *t, p));
                    }
                }
                LogRecord::Send { t, deliver_at, dst, msg, size, id, .. } => {
                    *ix.send_totals.entry(*msg).or_default() += size;
                    ix.sends_to[*dst as usize].push(SendRec {
                        t: *t,
                        deliver_at: *deliver_at,
                        msg: *msg,
                        size: *size,
                        id: *id,
                    });
                }
                LogRecord::AdvertIssued { t, node, prev, id, .. } => {
                    ix.adverts.entry((*node, *prev)).or_default().push((*t, *id));
                }
                _ => {}
            }
        }
        for (node, interval) in open.into_iter().enumerate() {
            if let Some((start, p)) = interval {
                ix.mining[node].push((start, ix.horizon.max(start), p));
            }
        }
        if let Some(best) = ix.best_tip() {
            let mut cursor = Some(best);
            while let Some(b) = cursor {
                ix.final_chain.insert(b);
                cursor = ix.by_hash.get(&ix.blocks[b].parent).copied();
            }
        }
        ix
    }

    /// Highest found block; ties go to the one most nodes ended on, then the
    /// earliest found, then the smaller hash.
    fn best_tip(&self) -> Option<usize> {
        let mut votes: HashMap<Hash, usize> = HashMap::new();
        for tip in self.final_tips.iter().flatten() {
            *votes.entry(*tip).or_default() += 1;
        }
        (0..self.blocks.len()).min_by(|&a, &b| {
            let (x, y) = (&self.blocks[a], &self.blocks[b]);
            y.height
                .cmp(&x.height)
                .then_with(|| votes.get(&y.hash).unwrap_or(&0).cmp(votes.get(&x.hash).unwrap_or(&0)))
                .then_with(|| x.found_at.total_cmp(&y.found_at))
                .then_with(|| x.hash.cmp(&y.hash))
        })
    }

    /// Find time of the final-chain block built on `parent`, if any.
    pub fn superseded_at(&self) -> HashMap<Hash, f64> {
        self.final_chain.iter().map(|&b| (self.blocks[b].parent, self.blocks[b].found_at)).collect()
    }

    pub fn on_final_chain(&self, hash: &Hash) -> bool {
        match self.by_hash.get(hash) {
            Some(b) => self.final_chain.contains(b),
            // Genesis is the only block that is never found.
            None => true,
        }
    }
}

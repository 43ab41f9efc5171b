use std::sync::Arc;

use crate::block::Block;
use crate::hash::Address;
use crate::protocol::advert::{make_advert, Advert, SelectionPolicy};
use crate::protocol::chain::{AcceptOutcome, ChainState};
use crate::protocol::mempool::{Mempool, MempoolReject};
use crate::protocol::registry::AdvertRegistry;
use crate::tx::Transaction;

/// One node's protocol state. All mutation goes through `&mut self`, so a
/// node is driven by a single caller at a time.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub address: Address,
    pub chain: ChainState,
    pub mempool: Mempool,
    pub registry: AdvertRegistry,
    pub policy: SelectionPolicy,
    pub mines: bool,
}

#[derive(Debug, Clone)]
pub struct BlockAcceptance {
    pub outcome: AcceptOutcome,
    /// Advert for the next block on the new tip, when this node mines and
    /// the tip moved.
    pub next_advert: Option<Advert>,
}

impl NodeState {
    pub fn new(address: Address, chain: ChainState, policy: SelectionPolicy, mines: bool) -> Self {
        NodeState {
            address,
            chain,
            mempool: Mempool::default(),
            registry: AdvertRegistry::default(),
            policy,
            mines,
        }
    }

    pub fn receive_transaction(&mut self, tx: Arc<Transaction>) -> Result<(), MempoolReject> {
        self.mempool.insert(tx, self.chain.utxo())
    }

    /// Advert for a block on the current tip from the current mempool.
    pub fn next_advert(&self) -> Advert {
        make_advert(self.address, self.chain.tip(), &self.mempool, &self.policy)
    }

    /// Applies a block that passed validation. When the tip moves, confirmed
    /// transactions leave the mempool, transactions from disconnected blocks
    /// come back if still valid, conflicts with the new UTXO view are dropped,
    /// stale adverts are pruned, and a miner immediately gets the advert for
    /// its next block. The mined-by-us and mined-by-a-peer cases are handled
    /// identically.
    pub fn on_block_accepted(&mut self, block: Arc<Block>) -> BlockAcceptance {
        let outcome = self.chain.accept(block);
        let AcceptOutcome::NewTip(update) = &outcome else {
            return BlockAcceptance { outcome, next_advert: None };
        };
        for b in &update.connected {
            for tx in &b.transactions {
                self.mempool.remove(&tx.txid());
            }
        }
        self.mempool.revalidate(self.chain.utxo());
        for b in &update.disconnected {
            for tx in &b.transactions {
                // Still confirmed on the new branch, or now conflicting: skip.
                let _ = self.mempool.insert(Arc::new(tx.clone()), self.chain.utxo());
            }
        }
        self.registry.prune(&self.chain);
        let next_advert = self.mines.then(|| self.next_advert());
        BlockAcceptance { outcome, next_advert }
    }
}

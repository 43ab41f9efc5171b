use std::collections::HashSet;
use std::sync::Arc;

use crate::block::{Block, BlockHeader, MAX_BLOCK_SIZE_BYTES};
use crate::encode::{put_bytes, put_len, Encode};
use crate::error::Error;
use crate::hash::{hash_bytes, Address, Hash};
use crate::protocol::mempool::{Mempool, TxLookup};
use crate::tx::{CoinbaseTransaction, Transaction, DEFAULT_COINBASE_SIZE};

/// Pre-mining announcement: who will mine, on top of which block, and exactly
/// which transactions in which order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advert {
    pub coinbase_address: Address,
    pub tx_hashes: Vec<Hash>,
    pub prev_block_hash: Hash,
}

impl Advert {
    pub fn new(
        coinbase_address: Address,
        tx_hashes: Vec<Hash>,
        prev_block_hash: Hash,
    ) -> Result<Self, Error> {
        let mut seen = HashSet::with_capacity(tx_hashes.len());
        if let Some(dup) = tx_hashes.iter().find(|h| !seen.insert(**h)) {
            return Err(Error::DuplicateAdvertTx(*dup));
        }
        Ok(Advert { coinbase_address, tx_hashes, prev_block_hash })
    }

    /// Content digest, used as the gossip id.
    pub fn id(&self) -> Hash {
        hash_bytes(&self.to_bytes())
    }
}

impl Encode for Advert {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.coinbase_address.0);
        put_len(out, self.tx_hashes.len());
        for h in &self.tx_hashes {
            put_bytes(out, &h.0);
        }
        put_bytes(out, &self.prev_block_hash.0);
    }
}

/// What a miner relays once its advertised block is found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSeed {
    pub coinbase_address: Address,
    pub coinbase: CoinbaseTransaction,
    pub header: BlockHeader,
}

impl BlockSeed {
    pub fn new(
        coinbase_address: Address,
        coinbase: CoinbaseTransaction,
        header: BlockHeader,
    ) -> Result<Self, Error> {
        if coinbase.coinbase_address != coinbase_address {
            return Err(Error::SeedAddressMismatch);
        }
        Ok(BlockSeed { coinbase_address, coinbase, header })
    }

    pub fn from_block(block: &Block) -> Self {
        BlockSeed {
            coinbase_address: block.coinbase_address(),
            coinbase: block.coinbase.clone(),
            header: block.header.clone(),
        }
    }

    /// Hash of the block this seed stands for.
    pub fn block_hash(&self) -> Hash {
        self.header.hash()
    }
}

impl Encode for BlockSeed {
    fn encode(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.coinbase_address.0);
        self.coinbase.encode(out);
        self.header.encode(out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxRequest {
    pub hashes: Vec<Hash>,
}

impl Encode for TxRequest {
    fn encode(&self, out: &mut Vec<u8>) {
        put_len(out, self.hashes.len());
        for h in &self.hashes {
            put_bytes(out, &h.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxResponse {
    pub txs: Vec<Arc<Transaction>>,
}

impl Encode for TxResponse {
    fn encode(&self, out: &mut Vec<u8>) {
        put_len(out, self.txs.len());
        for tx in &self.txs {
            tx.encode(out);
        }
    }
}

/// How a miner fills its next block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionPolicy {
    pub max_block_size_bytes: u64,
    pub coinbase_size_bytes: u32,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy {
            max_block_size_bytes: MAX_BLOCK_SIZE_BYTES,
            coinbase_size_bytes: DEFAULT_COINBASE_SIZE,
        }
    }
}

/// Greedy fill in arrival order: a transaction is taken if it still fits
/// under the size cap and spends nothing already spent by an earlier pick.
pub fn select_transactions(mempool: &Mempool, policy: &SelectionPolicy) -> Vec<Arc<Transaction>> {
    let mut size = BlockHeader::NOMINAL_SIZE + u64::from(policy.coinbase_size_bytes);
    let mut spent = HashSet::new();
    let mut picked = Vec::new();
    for tx in mempool.iter() {
        let tx_size = u64::from(tx.nominal_size_bytes());
        if size + tx_size > policy.max_block_size_bytes {
            continue;
        }
        if tx.inputs().iter().any(|op| spent.contains(op)) {
            continue;
        }
        spent.extend(tx.inputs().iter().copied());
        size += tx_size;
        picked.push(Arc::clone(tx));
    }
    picked
}

pub fn make_advert(address: Address, tip: Hash, mempool: &Mempool, policy: &SelectionPolicy) -> Advert {
    let tx_hashes = select_transactions(mempool, policy).iter().map(|tx| tx.txid()).collect();
    Advert { coinbase_address: address, tx_hashes, prev_block_hash: tip }
}

/// Advertised hashes not yet available locally, in advert order.
pub fn missing_txs<L: TxLookup + ?Sized>(advert: &Advert, txs: &L) -> Vec<Hash> {
    advert.tx_hashes.iter().filter(|h| txs.lookup_tx(h).is_none()).copied().collect()
}

pub fn make_block_seed(block: &Block) -> BlockSeed {
    BlockSeed::from_block(block)
}

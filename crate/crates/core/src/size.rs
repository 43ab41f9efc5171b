//! Modeled wire sizes. These are the byte counts charged to links by the
//! simulator; they use each transaction's nominal size rather than its
//! in-memory encoding so scenarios can pin realistic transaction sizes.

use crate::block::{Block, BlockHeader};
use crate::protocol::{Advert, BlockSeed, TxRequest, TxResponse};
use crate::tx::Transaction;

const ADDRESS_BYTES: u64 = 20;
const HASH_BYTES: u64 = 32;
/// Fixed framing charged to adverts and transaction requests.
pub const FRAMING_BYTES: u64 = 8;

pub trait WireSize {
    fn wire_size(&self) -> u64;
}

pub fn serialized_size<M: WireSize + ?Sized>(message: &M) -> u64 {
    message.wire_size()
}

impl WireSize for Transaction {
    fn wire_size(&self) -> u64 {
        u64::from(self.nominal_size_bytes())
    }
}

impl WireSize for Block {
    fn wire_size(&self) -> u64 {
        BlockHeader::NOMINAL_SIZE
            + u64::from(self.coinbase.nominal_size_bytes())
            + self.transactions.iter().map(WireSize::wire_size).sum::<u64>()
    }
}

impl WireSize for Advert {
    fn wire_size(&self) -> u64 {
        advert_size(self.tx_hashes.len())
    }
}

impl WireSize for BlockSeed {
    fn wire_size(&self) -> u64 {
        seed_size(u64::from(self.coinbase.nominal_size_bytes()))
    }
}

impl WireSize for TxRequest {
    fn wire_size(&self) -> u64 {
        HASH_BYTES * self.hashes.len() as u64 + FRAMING_BYTES
    }
}

impl WireSize for TxResponse {
    fn wire_size(&self) -> u64 {
        self.txs.iter().map(|tx| tx.wire_size()).sum()
    }
}

/// Size of an advert listing `tx_count` hashes.
pub fn advert_size(tx_count: usize) -> u64 {
    FRAMING_BYTES + ADDRESS_BYTES + HASH_BYTES + HASH_BYTES * tx_count as u64
}

/// Size of a block seed: address, coinbase and header.
pub fn seed_size(coinbase_size: u64) -> u64 {
    ADDRESS_BYTES + coinbase_size + BlockHeader::NOMINAL_SIZE
}

/// Size of a block with the given coinbase and uniform transaction sizes.
pub fn block_size(coinbase_size: u64, tx_count: usize, tx_size: u64) -> u64 {
    BlockHeader::NOMINAL_SIZE + coinbase_size + tx_count as u64 * tx_size
}

/// Largest transaction count whose block stays within `max_block_size`.
pub fn max_txs_per_block(max_block_size: u64, coinbase_size: u64, tx_size: u64) -> usize {
    let fixed = BlockHeader::NOMINAL_SIZE + coinbase_size;
    if tx_size == 0 || max_block_size < fixed {
        return 0;
    }
    ((max_block_size - fixed) / tx_size) as usize
}

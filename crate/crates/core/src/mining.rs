//! Proof-of-work search over a frozen transaction list, and the exponential
//! mining-time model used when the simulator needs thousands of blocks.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::block::{Block, BlockHeader, CompactTarget, MAX_BLOCK_SIZE_BYTES};
use crate::error::Error;
use crate::hash::Hash;
use crate::merkle::merkle_root;
use crate::size::WireSize;
use crate::tx::{CoinbaseTransaction, Transaction};

/// Everything needed to search for a block. The transaction list cannot be
/// changed after construction; mining may only vary nonce, extra nonce and
/// timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTemplate {
    prev_block_hash: Hash,
    coinbase: CoinbaseTransaction,
    transactions: Vec<Transaction>,
    difficulty_target: CompactTarget,
    version: i32,
    base_timestamp: u64,
}

impl BlockTemplate {
    pub fn new(
        prev_block_hash: Hash,
        coinbase: CoinbaseTransaction,
        transactions: Vec<Transaction>,
        difficulty_target: CompactTarget,
        version: i32,
        base_timestamp: u64,
    ) -> Result<Self, Error> {
        Self::with_size_cap(
            prev_block_hash,
            coinbase,
            transactions,
            difficulty_target,
            version,
            base_timestamp,
            MAX_BLOCK_SIZE_BYTES,
        )
    }

    pub fn with_size_cap(
        prev_block_hash: Hash,
        coinbase: CoinbaseTransaction,
        transactions: Vec<Transaction>,
        difficulty_target: CompactTarget,
        version: i32,
        base_timestamp: u64,
        max_block_size_bytes: u64,
    ) -> Result<Self, Error> {
        let size = BlockHeader::NOMINAL_SIZE
            + u64::from(coinbase.nominal_size_bytes())
            + transactions.iter().map(WireSize::wire_size).sum::<u64>();
        if size > max_block_size_bytes {
            return Err(Error::BlockTooLarge { size, max: max_block_size_bytes });
        }
        Ok(BlockTemplate {
            prev_block_hash,
            coinbase,
            transactions,
            difficulty_target,
            version,
            base_timestamp,
        })
    }

    pub fn prev_block_hash(&self) -> Hash {
        self.prev_block_hash
    }

    pub fn coinbase(&self) -> &CoinbaseTransaction {
        &self.coinbase
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn difficulty_target(&self) -> CompactTarget {
        self.difficulty_target
    }

    pub fn base_timestamp(&self) -> u64 {
        self.base_timestamp
    }

    pub fn version(&self) -> i32 {
        self.version
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningBudget(u64);

impl MiningBudget {
    pub fn new(max_hash_evaluations: u64) -> Result<Self, Error> {
        if max_hash_evaluations == 0 {
            return Err(Error::ZeroBudget);
        }
        Ok(MiningBudget(max_hash_evaluations))
    }

    pub fn max_hash_evaluations(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashRate(f64);

impl HashRate {
    pub fn new(hashes_per_second: f64) -> Result<Self, Error> {
        if !(hashes_per_second.is_finite() && hashes_per_second > 0.0) {
            return Err(Error::InvalidHashRate);
        }
        Ok(HashRate(hashes_per_second))
    }

    pub fn hashes_per_second(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningOutcome {
    pub block: Option<Block>,
    pub hash_evaluations: u64,
}

pub fn check_pow(header: &BlockHeader) -> bool {
    header.difficulty_target.is_met_by(&header.hash())
}

/// Searches nonces `0..=u32::MAX` for each extra nonce in turn, starting at
/// the template's extra nonce. The timestamp stays at the template's base.
pub fn mine(template: &BlockTemplate, budget: MiningBudget) -> MiningOutcome {
    let mut leaves = Vec::with_capacity(template.transactions.len() + 1);
    leaves.push(Hash::ZERO);
    leaves.extend(template.transactions.iter().map(Transaction::txid));

    let mut evaluations = 0u64;
    let mut extra_nonce = template.coinbase.extra_nonce;
    loop {
        let coinbase = template.coinbase.with_extra_nonce(extra_nonce);
        leaves[0] = coinbase.txid();
        let mut header = BlockHeader {
            version: template.version,
            prev_block_hash: template.prev_block_hash,
            merkle_root: merkle_root(&leaves).expect("non-empty"),
            timestamp: template.base_timestamp,
            difficulty_target: template.difficulty_target,
            nonce: 0,
        };
        for nonce in 0..=u32::MAX {
            if evaluations == budget.0 {
                return MiningOutcome { block: None, hash_evaluations: evaluations };
            }
            header.nonce = nonce;
            evaluations += 1;
            if check_pow(&header) {
                let block = Block { header, coinbase, transactions: template.transactions.clone() };
                return MiningOutcome { block: Some(block), hash_evaluations: evaluations };
            }
        }
        extra_nonce = extra_nonce.wrapping_add(1);
    }
}

/// Time until the next solution for a miner of the given rate: exponential
/// with mean `2^bits / rate`.
pub fn sample_mining_time<R: Rng + ?Sized>(rate: HashRate, target: CompactTarget, rng: &mut R) -> f64 {
    let lambda = rate.0 / target.expected_hashes();
    Exp::new(lambda).expect("hash rate is positive").sample(rng)
}

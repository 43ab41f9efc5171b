use thiserror::Error;

use crate::block::Block;
use crate::hash::{Address, Hash};
use crate::mining::check_pow;
use crate::protocol::advert::BlockSeed;
use crate::protocol::chain::{first_invalid_tx, ChainState};
use crate::protocol::mempool::TxLookup;
use crate::protocol::registry::AdvertRegistry;

/// Outcome of block validation. Only `Ok` means accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValidationVerdict {
    Ok,
    NoMatchingAdvert,
    CoinbaseMismatch,
    WrongPrevHash,
    PowFail,
    TxListMismatch,
    MerkleMismatch,
    MissingTxs,
    InvalidTx,
}

impl ValidationVerdict {
    pub fn accepted(self) -> bool {
        self == ValidationVerdict::Ok
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValidationVerdict::Ok => "OK",
            ValidationVerdict::NoMatchingAdvert => "NO_MATCHING_ADVERT",
            ValidationVerdict::CoinbaseMismatch => "COINBASE_MISMATCH",
            ValidationVerdict::WrongPrevHash => "WRONG_PREV_HASH",
            ValidationVerdict::PowFail => "POW_FAIL",
            ValidationVerdict::TxListMismatch => "TX_LIST_MISMATCH",
            ValidationVerdict::MerkleMismatch => "MERKLE_MISMATCH",
            ValidationVerdict::MissingTxs => "MISSING_TXS",
            ValidationVerdict::InvalidTx => "INVALID_TX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconstructError {
    #[error("no advert registered for this miner and parent")]
    NoMatchingAdvert,
    #[error("{} advertised transactions are unavailable", .0.len())]
    MissingTxs(Vec<Hash>),
}

impl From<&ReconstructError> for ValidationVerdict {
    fn from(e: &ReconstructError) -> Self {
        match e {
            ReconstructError::NoMatchingAdvert => ValidationVerdict::NoMatchingAdvert,
            ReconstructError::MissingTxs(_) => ValidationVerdict::MissingTxs,
        }
    }
}

/// Rebuilds a block from its seed: the advert registered under the seed's
/// address and parent supplies the transaction order, `txs` supplies the
/// bodies. The Merkle root is not checked here.
pub fn reconstruct_block<L: TxLookup + ?Sized>(
    seed: &BlockSeed,
    registry: &AdvertRegistry,
    txs: &L,
) -> Result<Block, ReconstructError> {
    let advert = registry
        .get(&seed.coinbase_address, &seed.header.prev_block_hash)
        .ok_or(ReconstructError::NoMatchingAdvert)?;
    let mut transactions = Vec::with_capacity(advert.tx_hashes.len());
    let mut missing = Vec::new();
    for h in &advert.tx_hashes {
        match txs.lookup_tx(h) {
            Some(tx) if missing.is_empty() => transactions.push(tx.clone()),
            Some(_) => {}
            None => missing.push(*h),
        }
    }
    if !missing.is_empty() {
        return Err(ReconstructError::MissingTxs(missing));
    }
    Ok(Block { header: seed.header.clone(), coinbase: seed.coinbase.clone(), transactions })
}

/// Validates a block against the advert of the miner it pays.
pub fn validate_block(block: &Block, registry: &AdvertRegistry, chain: &ChainState) -> ValidationVerdict {
    validate_advertised(block, block.coinbase_address(), registry, chain)
}

/// Validates a block claimed by `advertiser` (the address a seed names).
/// Checks run in a fixed order and the first failure is reported:
/// advert exists, coinbase pays the advertiser, parent known, proof of work,
/// transaction list equals the advert, Merkle root, transaction validity.
pub fn validate_advertised(
    block: &Block,
    advertiser: Address,
    registry: &AdvertRegistry,
    chain: &ChainState,
) -> ValidationVerdict {
    let prev = block.header.prev_block_hash;
    let Some(advert) = registry.get(&advertiser, &prev) else {
        return ValidationVerdict::NoMatchingAdvert;
    };
    if block.coinbase_address() != advert.coinbase_address {
        return ValidationVerdict::CoinbaseMismatch;
    }
    if !chain.contains(&prev) {
        return ValidationVerdict::WrongPrevHash;
    }
    if !check_pow(&block.header) {
        return ValidationVerdict::PowFail;
    }
    if block.transactions.len() != advert.tx_hashes.len()
        || block.transactions.iter().zip(&advert.tx_hashes).any(|(tx, h)| tx.txid() != *h)
    {
        return ValidationVerdict::TxListMismatch;
    }
    check_body(block, chain)
}

/// Validation for full-block relay, where there is no advert to consult.
pub fn validate_full_block(block: &Block, chain: &ChainState) -> ValidationVerdict {
    if !chain.contains(&block.header.prev_block_hash) {
        return ValidationVerdict::WrongPrevHash;
    }
    if !check_pow(&block.header) {
        return ValidationVerdict::PowFail;
    }
    check_body(block, chain)
}

fn check_body(block: &Block, chain: &ChainState) -> ValidationVerdict {
    if !block.has_valid_merkle_root() {
        return ValidationVerdict::MerkleMismatch;
    }
    let view = chain.utxo_view_at(&block.header.prev_block_hash).expect("parent checked above");
    match first_invalid_tx(&view, block) {
        Some(_) => ValidationVerdict::InvalidTx,
        None => ValidationVerdict::Ok,
    }
}

//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use bap_core::block::BLOCK_VERSION;
use bap_core::mining::{mine, BlockTemplate, MiningBudget};
use bap_core::protocol::{genesis_block, Advert, AdvertRegistry, ChainState, ValidationVerdict};
use bap_core::{
    Address, Block, BlockHeader, CoinbaseTransaction, CompactTarget, Hash, OutPoint, Transaction, TxOut,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const FUNDING_VALUE: u64 = 1_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A chain whose genesis funds `outputs` spendable outpoints.
pub struct Fixture {
    pub chain: ChainState,
    pub funding: Vec<OutPoint>,
}

impl Fixture {
    pub fn new(outputs: usize) -> Fixture {
        let funding_outs = (0..outputs)
            .map(|i| TxOut { address: Address::for_node(10_000 + i), value: FUNDING_VALUE })
            .collect();
        let genesis = genesis_block(funding_outs, 1_700_000_000);
        let funding_txid = genesis.transactions[0].txid();
        let funding = (0..outputs as u32).map(|i| OutPoint::new(funding_txid, i)).collect();
        Fixture { chain: ChainState::new(genesis), funding }
    }

    /// `n` valid transactions spending distinct funding outputs, in random order.
    pub fn random_txs(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Transaction> {
        let mut picks: Vec<usize> = (0..self.funding.len()).collect();
        rand::seq::SliceRandom::shuffle(&mut picks[..], rng);
        picks
            .into_iter()
            .take(n)
            .map(|i| {
                let value = rng.random_range(1..=FUNDING_VALUE);
                let size = rng.random_range(80..=1500);
                Transaction::new(
                    vec![self.funding[i]],
                    vec![TxOut { address: Address(rng.random()), value }],
                    size,
                )
                .unwrap()
            })
            .collect()
    }
}

pub fn coinbase(address: Address, extra_nonce: u64) -> CoinbaseTransaction {
    CoinbaseTransaction::new(address, 50, extra_nonce, 200).unwrap()
}

/// Mines a block on `prev` with the given transactions at `bits` zero bits.
pub fn mine_block(prev: Hash, miner: Address, txs: Vec<Transaction>, bits: u32, timestamp: u64) -> Block {
    let template = BlockTemplate::new(
        prev,
        coinbase(miner, 0),
        txs,
        CompactTarget::new(bits).unwrap(),
        BLOCK_VERSION,
        timestamp,
    )
    .unwrap();
    mine(&template, MiningBudget::new(u64::MAX).unwrap()).block.unwrap()
}

pub fn advert_for(block: &Block) -> Advert {
    Advert::new(block.coinbase_address(), block.txids(), block.header.prev_block_hash).unwrap()
}

pub fn store(txs: &[Transaction]) -> HashMap<Hash, Arc<Transaction>> {
    txs.iter().map(|tx| (tx.txid(), Arc::new(tx.clone()))).collect()
}

pub fn registry_with(adverts: impl IntoIterator<Item = Advert>) -> AdvertRegistry {
    let mut registry = AdvertRegistry::default();
    for advert in adverts {
        registry.register(advert);
    }
    registry
}

// ---- oracles written against raw byte layouts, not the crate's encoders ----

pub fn sha256d(data: &[u8]) -> [u8; 32] {
    Sha256::digest(Sha256::digest(data)).into()
}

/// Header hash from the documented 82-byte big-endian layout.
pub fn oracle_header_hash(h: &BlockHeader) -> [u8; 32] {
    let mut b = Vec::with_capacity(82);
    b.extend_from_slice(&h.version.to_be_bytes());
    b.extend_from_slice(&h.prev_block_hash.0);
    b.extend_from_slice(&h.merkle_root.0);
    b.extend_from_slice(&h.timestamp.to_be_bytes());
    b.extend_from_slice(&(h.difficulty_target.leading_zero_bits() as u16).to_be_bytes());
    b.extend_from_slice(&h.nonce.to_be_bytes());
    sha256d(&b)
}

pub fn oracle_leading_zeros(digest: &[u8; 32]) -> u32 {
    let mut bits = 0;
    for byte in digest {
        if *byte == 0 {
            bits += 8;
        } else {
            return bits + byte.leading_zeros();
        }
    }
    bits
}

pub fn oracle_pow(h: &BlockHeader) -> bool {
    oracle_leading_zeros(&oracle_header_hash(h)) >= h.difficulty_target.leading_zero_bits()
}

/// Recursive Merkle root: split into pairs, duplicate an odd tail.
pub fn oracle_merkle(leaves: &[[u8; 32]]) -> [u8; 32] {
    if leaves.len() == 1 {
        return leaves[0];
    }
    let parents: Vec<[u8; 32]> = leaves
        .chunks(2)
        .map(|pair| {
            let right = pair.get(1).unwrap_or(&pair[0]);
            let mut cat = [0u8; 64];
            cat[..32].copy_from_slice(&pair[0]);
            cat[32..].copy_from_slice(right);
            sha256d(&cat)
        })
        .collect();
    oracle_merkle(&parents)
}

/// The verdict a seed-relayed block should get, from first principles:
/// advert lookup, coinbase, parent, work, list, commitment, spends.
pub fn oracle_verdict(
    block: &Block,
    advertiser: Address,
    adverts: &[Advert],
    known_blocks: &HashSet<Hash>,
    utxo: &HashMap<OutPoint, TxOut>,
) -> ValidationVerdict {
    let prev = block.header.prev_block_hash;
    let Some(advert) = adverts.iter().find(|a| a.coinbase_address == advertiser && a.prev_block_hash == prev)
    else {
        return ValidationVerdict::NoMatchingAdvert;
    };
    if block.coinbase.coinbase_address != advert.coinbase_address {
        return ValidationVerdict::CoinbaseMismatch;
    }
    if !known_blocks.contains(&prev) {
        return ValidationVerdict::WrongPrevHash;
    }
    if !oracle_pow(&block.header) {
        return ValidationVerdict::PowFail;
    }
    let listed: Vec<Hash> = block.transactions.iter().map(|t| t.txid()).collect();
    if listed != advert.tx_hashes {
        return ValidationVerdict::TxListMismatch;
    }
    let mut leaves = vec![block.coinbase.txid().0];
    leaves.extend(listed.iter().map(|h| h.0));
    if oracle_merkle(&leaves) != block.header.merkle_root.0 {
        return ValidationVerdict::MerkleMismatch;
    }
    let mut view = utxo.clone();
    let (cb_point, cb_out) = block.coinbase.output();
    view.insert(cb_point, cb_out);
    for tx in &block.transactions {
        let mut value_in = 0u64;
        for input in tx.inputs() {
            match view.remove(input) {
                Some(out) => value_in += out.value,
                None => return ValidationVerdict::InvalidTx,
            }
        }
        if tx.output_value() > value_in {
            return ValidationVerdict::InvalidTx;
        }
        for (i, out) in tx.outputs().iter().enumerate() {
            view.insert(OutPoint::new(tx.txid(), i as u32), *out);
        }
    }
    ValidationVerdict::Ok
}

/// Searches nonces upward from `from` for one whose header meets or misses
/// the target, as requested.
pub fn nonce_where(header: &BlockHeader, from: u32, meets: bool) -> u32 {
    let mut h = header.clone();
    (from..=u32::MAX)
        .find(|n| {
            h.nonce = *n;
            oracle_pow(&h) == meets
        })
        .expect("a nonce exists")
}

pub fn random_hash(rng: &mut impl Rng) -> Hash {
    Hash(rng.random())
}

/// One advertise, mine, seed, reconstruct, validate cycle driven by `seed`.
/// Returns a description of the first discrepancy.
pub fn roundtrip_case(seed: u64) -> Result<(), String> {
    use bap_core::protocol::{
        make_block_seed, reconstruct_block, validate_advertised, NodeState, SelectionPolicy,
    };

    let mut rng = rng(seed);
    let fixture = Fixture::new(48);
    let bits = rng.random_range(0..=8);
    let count = rng.random_range(0..=40);
    let mut txs = fixture.random_txs(&mut rng, count);
    let mut chain = fixture.chain.clone();
    if rng.random_bool(0.5) {
        // Build on a non-genesis parent that already confirmed some transactions.
        let confirmed: Vec<Transaction> = txs.drain(..txs.len() / 3).collect();
        let parent = mine_block(chain.tip(), Address(rng.random()), confirmed, bits, 1_700_000_600);
        chain.accept(Arc::new(parent));
    }
    let miner = Address(rng.random());
    let mut node = NodeState::new(miner, chain.clone(), SelectionPolicy::default(), true);
    for tx in &txs {
        node.receive_transaction(Arc::new(tx.clone())).map_err(|e| format!("mempool rejected: {e}"))?;
    }
    let advert = node.next_advert();
    let body: Vec<Transaction> =
        advert.tx_hashes.iter().map(|h| Transaction::clone(node.mempool.get(h).unwrap())).collect();
    let template = BlockTemplate::new(
        advert.prev_block_hash,
        coinbase(miner, rng.random()),
        body,
        CompactTarget::new(bits).unwrap(),
        BLOCK_VERSION,
        1_700_001_200 + rng.random_range(0..1000),
    )
    .map_err(|e| e.to_string())?;
    let block = mine(&template, MiningBudget::new(u64::MAX).unwrap()).block.ok_or("mining gave up")?;
    let seed_msg = make_block_seed(&block);

    let registry = registry_with([advert]);
    let rebuilt = reconstruct_block(&seed_msg, &registry, &store(&txs)).map_err(|e| e.to_string())?;
    let verdict = validate_advertised(&rebuilt, seed_msg.coinbase_address, &registry, &chain);
    if verdict != ValidationVerdict::Ok {
        return Err(format!("verdict {}", verdict.as_str()));
    }
    if rebuilt != block || rebuilt.hash() != block.hash() {
        return Err("reconstructed block differs".into());
    }
    Ok(())
}

pub const MUTATION_CLASSES: [&str; 8] = [
    "coinbase",
    "prev-hash",
    "nonce",
    "tx-drop",
    "tx-append",
    "tx-reorder",
    "tx-substitute",
    "merkle-corrupt",
];

/// Applies every mutation class to one random base block. Each mutated block
/// must get the oracle's verdict, and that verdict must not be `Ok`.
pub fn mutation_case(seed: u64) -> Result<(), String> {
    use bap_core::protocol::validate_advertised;

    let mut rng = rng(seed);
    let fixture = Fixture::new(32);
    let count = rng.random_range(3..=16);
    let txs = fixture.random_txs(&mut rng, count);
    let (advertised, spare) = txs.split_at(txs.len() - 1);
    let miner = Address(rng.random());
    let bits = rng.random_range(1..=8);
    let base = mine_block(fixture.chain.tip(), miner, advertised.to_vec(), bits, 1_700_000_600);
    let advert = advert_for(&base);
    let registry = registry_with([advert.clone()]);
    let known: HashSet<Hash> = [fixture.chain.tip()].into();
    let utxo = fixture.chain.utxo().clone();

    let remine = |mut block: Block| {
        let n = nonce_where(&block.header, 0, true);
        block.header.nonce = n;
        block
    };

    for class in MUTATION_CLASSES {
        let mut block = base.clone();
        match class {
            "coinbase" => block.coinbase.coinbase_address = Address(rng.random()),
            "prev-hash" => block.header.prev_block_hash = random_hash(&mut rng),
            "nonce" => block.header.nonce = nonce_where(&base.header, base.header.nonce + 1, false),
            "tx-drop" => {
                let i = rng.random_range(0..block.transactions.len());
                block.transactions.remove(i);
            }
            "tx-append" => block.transactions.push(spare[0].clone()),
            "tx-reorder" => {
                let i = rng.random_range(0..block.transactions.len() - 1);
                block.transactions.swap(i, i + 1);
            }
            "tx-substitute" => {
                let i = rng.random_range(0..block.transactions.len());
                block.transactions[i] = spare[0].clone();
            }
            "merkle-corrupt" => {
                block.header.merkle_root = random_hash(&mut rng);
                block = remine(block);
            }
            _ => unreachable!(),
        }
        let expected = oracle_verdict(&block, miner, std::slice::from_ref(&advert), &known, &utxo);
        let got = validate_advertised(&block, miner, &registry, &fixture.chain);
        if expected == ValidationVerdict::Ok {
            return Err(format!("{class}: oracle accepted the mutation"));
        }
        if got != expected {
            return Err(format!("{class}: got {}, oracle says {}", got.as_str(), expected.as_str()));
        }
    }
    Ok(())
}

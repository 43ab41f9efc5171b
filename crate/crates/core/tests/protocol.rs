mod common;

use std::collections::hash_map::Entry;
use std::collections::HashSet;
use std::sync::Arc;

use bap_core::protocol::{
    reconstruct_block, validate_advertised, validate_block, validate_full_block, Advert, AdvertRegistry,
    Mempool, MempoolReject, ReconstructError, RegisterOutcome, ValidationVerdict,
};
use bap_core::{Address, Hash, OutPoint, Transaction, TxOut};
use common::*;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn advertised_blocks_roundtrip(seed in any::<u64>()) {
        prop_assert_eq!(roundtrip_case(seed), Ok(()));
    }

    #[test]
    fn mutations_match_oracle(seed in any::<u64>()) {
        prop_assert_eq!(mutation_case(seed), Ok(()));
    }

    #[test]
    fn registry_keeps_first_per_pair(ops in prop::collection::vec((0u8..4, 0u8..3, any::<u8>()), 0..200)) {
        let mut registry = AdvertRegistry::default();
        let mut first: std::collections::HashMap<(u8, u8), Advert> = Default::default();
        for (miner, prev, salt) in ops {
            let advert = Advert::new(Address([miner; 20]), vec![Hash([salt; 32])], Hash([prev; 32])).unwrap();
            let outcome = registry.register(advert.clone());
            let expected = match first.entry((miner, prev)) {
                Entry::Occupied(_) => RegisterOutcome::DuplicateRejected,
                Entry::Vacant(slot) => {
                    slot.insert(advert);
                    RegisterOutcome::Registered
                }
            };
            prop_assert_eq!(outcome, expected);
        }
        prop_assert_eq!(registry.len(), first.len());
        let keys: HashSet<_> = registry.iter().map(|a| (a.coinbase_address, a.prev_block_hash)).collect();
        prop_assert_eq!(keys.len(), registry.len());
        for ((miner, prev), advert) in &first {
            prop_assert_eq!(registry.get(&Address([*miner; 20]), &Hash([*prev; 32])), Some(advert));
        }
    }

    #[test]
    fn mempool_never_double_spends(ops in prop::collection::vec((0usize..12, 0usize..12, 1u64..1200, any::<bool>()), 1..80)) {
        let fixture = Fixture::new(12);
        let utxo = fixture.chain.utxo().clone();
        let mut pool = Mempool::default();
        for (i, (a, b, value, remove)) in ops.into_iter().enumerate() {
            let inputs = if a == b { vec![fixture.funding[a]] } else { vec![fixture.funding[a], fixture.funding[b]] };
            let tx = Transaction::new(inputs, vec![TxOut { address: Address([i as u8; 20]), value }], 200).unwrap();
            let txid = tx.txid();
            let accepted = pool.insert(Arc::new(tx), &utxo).is_ok();
            if accepted && remove {
                pool.remove(&txid);
            }
            let mut spent = HashSet::new();
            for tx in pool.iter() {
                let mut value_in = 0;
                for input in tx.inputs() {
                    prop_assert!(spent.insert(*input), "outpoint spent twice in pool");
                    value_in += utxo[input].value;
                }
                prop_assert!(tx.output_value() <= value_in);
            }
        }
    }
}

#[test]
fn mempool_reject_reasons() {
    let fixture = Fixture::new(2);
    let utxo = fixture.chain.utxo().clone();
    let out = |v| vec![TxOut { address: Address([1; 20]), value: v }];
    let mut pool = Mempool::default();
    let a = Arc::new(Transaction::new(vec![fixture.funding[0]], out(10), 200).unwrap());
    pool.insert(Arc::clone(&a), &utxo).unwrap();
    assert_eq!(pool.insert(Arc::clone(&a), &utxo), Err(MempoolReject::AlreadyPooled));
    let conflict = Transaction::new(vec![fixture.funding[0]], out(11), 200).unwrap();
    assert_eq!(pool.insert(Arc::new(conflict), &utxo), Err(MempoolReject::Conflict(a.txid())));
    let missing = OutPoint::new(Hash([9; 32]), 0);
    let orphan = Transaction::new(vec![missing], out(1), 200).unwrap();
    assert_eq!(pool.insert(Arc::new(orphan), &utxo), Err(MempoolReject::MissingInput(missing)));
    let twice = Transaction::new(vec![fixture.funding[1], fixture.funding[1]], out(1), 200).unwrap();
    assert_eq!(pool.insert(Arc::new(twice), &utxo), Err(MempoolReject::DuplicateInput(fixture.funding[1])));
    let greedy = Transaction::new(vec![fixture.funding[1]], out(FUNDING_VALUE + 1), 200).unwrap();
    assert_eq!(pool.insert(Arc::new(greedy), &utxo), Err(MempoolReject::Overspend));
}

#[test]
fn reconstruction_reports_what_is_missing() {
    let fixture = Fixture::new(4);
    let mut rng = rng(5);
    let txs = fixture.random_txs(&mut rng, 3);
    let block = mine_block(fixture.chain.tip(), Address([7; 20]), txs.clone(), 4, 1);
    let seed = bap_core::protocol::make_block_seed(&block);
    let empty = AdvertRegistry::default();
    assert_eq!(reconstruct_block(&seed, &empty, &store(&txs)), Err(ReconstructError::NoMatchingAdvert));
    let registry = registry_with([advert_for(&block)]);
    assert_eq!(
        reconstruct_block(&seed, &registry, &store(&txs[1..])),
        Err(ReconstructError::MissingTxs(vec![txs[0].txid()]))
    );
    assert_eq!(reconstruct_block(&seed, &registry, &store(&txs)).unwrap(), block);
}

#[test]
fn double_spend_inside_a_block_is_invalid() {
    let fixture = Fixture::new(2);
    let spend = |v| {
        Transaction::new(vec![fixture.funding[0]], vec![TxOut { address: Address([v; 20]), value: 5 }], 100)
            .unwrap()
    };
    let block = mine_block(fixture.chain.tip(), Address([3; 20]), vec![spend(1), spend(2)], 4, 1);
    let registry = registry_with([advert_for(&block)]);
    assert_eq!(validate_block(&block, &registry, &fixture.chain), ValidationVerdict::InvalidTx);
    assert_eq!(validate_full_block(&block, &fixture.chain), ValidationVerdict::InvalidTx);
}

#[test]
fn verdict_order_follows_the_checklist() {
    // A block failing several checks reports the earliest one.
    let fixture = Fixture::new(4);
    let mut rng = rng(11);
    let txs = fixture.random_txs(&mut rng, 2);
    let miner = Address([4; 20]);
    let mut block = mine_block(fixture.chain.tip(), miner, txs, 8, 1);
    let registry = registry_with([advert_for(&block)]);
    block.header.nonce = nonce_where(&block.header, block.header.nonce + 1, false);
    block.transactions.reverse();
    assert_eq!(validate_advertised(&block, miner, &registry, &fixture.chain), ValidationVerdict::PowFail);
    block.coinbase.coinbase_address = Address(rng.random());
    assert_eq!(
        validate_advertised(&block, miner, &registry, &fixture.chain),
        ValidationVerdict::CoinbaseMismatch
    );
    assert_eq!(
        validate_advertised(&block, Address([5; 20]), &registry, &fixture.chain),
        ValidationVerdict::NoMatchingAdvert
    );
}

#[test]
fn advert_on_unknown_parent_reports_wrong_prev() {
    let fixture = Fixture::new(2);
    let unknown = Hash([0xAB; 32]);
    let block = mine_block(unknown, Address([6; 20]), Vec::new(), 4, 1);
    let registry = registry_with([advert_for(&block)]);
    let known: HashSet<Hash> = [fixture.chain.tip()].into();
    let expected =
        oracle_verdict(&block, Address([6; 20]), &[advert_for(&block)], &known, fixture.chain.utxo());
    assert_eq!(expected, ValidationVerdict::WrongPrevHash);
    assert_eq!(validate_block(&block, &registry, &fixture.chain), expected);
}

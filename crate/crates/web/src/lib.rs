//! WebAssembly bindings for the static demo page in `www/`. Each export takes
//! plain numbers or a JSON string and returns a JSON string; the `*_json`
//! functions hold the logic so they can be tested natively.

use bap_core::block::BLOCK_VERSION;
use bap_core::metrics::{analyze, Summary};
use bap_core::mining::{mine, BlockTemplate, MiningBudget};
use bap_core::simnet::{run_scenario, RelayStrategy, Scenario};
use bap_core::size::{advert_size, block_size, max_txs_per_block, seed_size};
use bap_core::{hash_bytes, Address, CoinbaseTransaction, CompactTarget, OutPoint, Transaction, TxOut};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on node count for in-browser runs.
pub const MAX_DEMO_NODES: usize = 32;
const TOY_BUDGET: u64 = 1 << 26;

#[wasm_bindgen]
pub fn size_model(tx_count: u32, tx_size: u32, coinbase_size: u32) -> String {
    size_model_json(tx_count, tx_size, coinbase_size)
}

#[wasm_bindgen]
pub fn simulate(params: &str) -> Result<String, JsError> {
    simulate_json(params).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mine_toy(bits: u32, tx_count: u32, seed: u32) -> Result<String, JsError> {
    mine_toy_json(bits, tx_count, seed).map_err(|e| JsError::new(&e))
}

pub fn size_model_json(tx_count: u32, tx_size: u32, coinbase_size: u32) -> String {
    let n = tx_count as usize;
    let block = block_size(u64::from(coinbase_size), n, u64::from(tx_size));
    let advert = advert_size(n);
    let seed = seed_size(u64::from(coinbase_size));
    json!({
        "block_bytes": block,
        "advert_bytes": advert,
        "seed_bytes": seed,
        "block_to_advert": block as f64 / advert as f64,
        "block_to_seed": block as f64 / seed as f64,
        "max_txs_in_1mb": max_txs_per_block(1_000_000, u64::from(coinbase_size), u64::from(tx_size)),
    })
    .to_string()
}

#[derive(Serialize)]
struct StrategyResult {
    strategy: RelayStrategy,
    summary: Summary,
}

/// Runs the given scenario (JSON, same fields as the TOML files) once per
/// relay strategy.
pub fn simulate_json(params: &str) -> Result<String, String> {
    let base: Scenario = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if base.node_count > MAX_DEMO_NODES {
        return Err(format!("node_count is limited to {MAX_DEMO_NODES} in the browser"));
    }
    let mut results = Vec::new();
    for strategy in
        [RelayStrategy::BaselineFullBlock, RelayStrategy::AdvertProtocol, RelayStrategy::LateAdvert]
    {
        let scenario = Scenario { strategy, ..base.clone() };
        let log = run_scenario(&scenario).map_err(|e| e.to_string())?;
        let summary = Summary::new(&analyze(&log), log.start());
        results.push(StrategyResult { strategy, summary });
    }
    serde_json::to_string(&results).map_err(|e| e.to_string())
}

/// Mines a real block of `tx_count` synthetic transactions at `bits` leading
/// zero bits.
pub fn mine_toy_json(bits: u32, tx_count: u32, seed: u32) -> Result<String, String> {
    if bits > 24 {
        return Err("bits above 24 take too long in a browser".into());
    }
    if tx_count > 5000 {
        return Err("at most 5000 transactions".into());
    }
    let txs = (0..tx_count)
        .map(|i| {
            let funding = hash_bytes(&[seed.to_be_bytes(), i.to_be_bytes()].concat());
            Transaction::new(
                vec![OutPoint::new(funding, 0)],
                vec![TxOut { address: Address::for_node(i as usize % 16), value: 10 }],
                500,
            )
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let coinbase = CoinbaseTransaction::new(Address::for_node(0), 50, 0, 200).map_err(|e| e.to_string())?;
    let target = CompactTarget::new(bits).map_err(|e| e.to_string())?;
    let prev = hash_bytes(&seed.to_be_bytes());
    let template = BlockTemplate::new(prev, coinbase, txs, target, BLOCK_VERSION, 1_700_000_000)
        .map_err(|e| e.to_string())?;
    let outcome = mine(&template, MiningBudget::new(TOY_BUDGET).expect("non-zero"));
    let Some(block) = outcome.block else {
        return Err(format!("no solution within {TOY_BUDGET} hashes"));
    };
    let hash = block.hash();
    Ok(json!({
        "hash": hash.to_hex(),
        "leading_zero_bits": hash.leading_zero_bits(),
        "nonce": block.header.nonce,
        "extra_nonce": block.coinbase.extra_nonce,
        "merkle_root": block.header.merkle_root.to_hex(),
        "hash_evaluations": outcome.hash_evaluations,
        "expected_evaluations": target.expected_hashes(),
    })
    .to_string())
}

use bap_web::{mine_toy_json, simulate_json, size_model_json};
use serde_json::Value;

#[test]
fn size_model_reference_block() {
    let v: Value = serde_json::from_str(&size_model_json(2000, 500, 200)).unwrap();
    assert_eq!(v["block_bytes"], 1_000_280);
    assert_eq!(v["advert_bytes"], 64_060);
    assert_eq!(v["seed_bytes"], 300);
    assert_eq!(v["max_txs_in_1mb"], 1999);
}

#[test]
fn toy_block_meets_target() {
    let v: Value = serde_json::from_str(&mine_toy_json(10, 20, 3).unwrap()).unwrap();
    assert!(v["leading_zero_bits"].as_u64().unwrap() >= 10);
    assert_eq!(v["hash"].as_str().unwrap().len(), 64);
    assert_eq!(mine_toy_json(10, 20, 3).unwrap(), mine_toy_json(10, 20, 3).unwrap());
    assert!(mine_toy_json(30, 1, 0).is_err());
}

#[test]
fn simulate_runs_all_strategies() {
    let params = r#"{"node_count": 6, "seed": 2, "horizon_secs": 900.0, "difficulty_bits": 8,
        "hash_rate": 2.0, "transactions": {"rate_per_sec": 3.0}}"#;
    let v: Value = serde_json::from_str(&simulate_json(params).unwrap()).unwrap();
    let runs = v.as_array().unwrap();
    assert_eq!(runs.len(), 3);
    let found: Vec<_> = runs.iter().map(|r| r["summary"]["blocks_found"].as_u64().unwrap()).collect();
    assert!(found[0] > 0);
    assert!(simulate_json(r#"{"node_count": 1000}"#).is_err());
    assert!(simulate_json(r#"{"node_count": 4, "links": {"bandwidth_bytes_per_sec": -1}}"#).is_err());
}

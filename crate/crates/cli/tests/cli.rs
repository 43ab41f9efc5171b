use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bap_cli::load_scenario;
use bap_cli::run::INCOMPLETE_MARKER;
use bap_core::simnet::{Dist, RelayStrategy, Topology};
use serde_json::Value;
use tempfile::TempDir;

const FAST: &str = r#"
node_count = 4
seed = 11
horizon_secs = 600.0
difficulty_bits = 8
hash_rate = 4.0

[topology]
kind = "ring"

[transactions]
rate_per_sec = 2.0
"#;

fn bapsim(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bapsim"))
        .args(args)
        .env("BAPSIM_OUT", out_root)
        .output()
        .expect("spawn bapsim")
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn repo_scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn minimal_file_takes_defaults() {
    let s = load_scenario(&repo_scenario("minimal.toml")).unwrap();
    assert_eq!(s.node_count, 2);
    assert_eq!(s.strategy, RelayStrategy::AdvertProtocol);
    assert_eq!(s.topology, Topology::RandomRegular { degree: 4 });
    assert_eq!(s.max_block_size_bytes, 1_000_000);
}

#[test]
fn shipped_scenarios_load() {
    let reference = load_scenario(&repo_scenario("reference.toml")).unwrap();
    assert_eq!(reference.node_count, 16);
    assert_eq!(reference.max_block_size_bytes, 1_000_000);
    load_scenario(&repo_scenario("quick.toml")).unwrap();
}

#[test]
fn negative_bandwidth_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let path =
        write_scenario(tmp.path(), "bad.toml", "node_count = 3\n[links]\nbandwidth_bytes_per_sec = -5.0\n");
    let out = bapsim(&["validate-scenario", "--scenario", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bandwidth"), "{}", stderr(&out));
}

#[test]
fn unknown_field_rejected() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "typo.toml", "node_cout = 3\n");
    let out = bapsim(&["validate-scenario", "--scenario", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("node_cout"), "{}", stderr(&out));
}

#[test]
fn syntax_error_reports_line() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "broken.toml", "node_count = 3\nseed = = 4\n");
    let out = bapsim(&["validate-scenario", "--scenario", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(bapsim(&["run"], tmp.path()).status.code(), Some(1));
    assert_eq!(bapsim(&["frobnicate"], tmp.path()).status.code(), Some(1));
    let path = write_scenario(tmp.path(), "s.toml", FAST);
    let bad =
        bapsim(&["run", "--scenario", path.to_str().unwrap(), "--strategy", "carrier-pigeon"], tmp.path());
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(bapsim(&["--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn missing_file_exits_two() {
    let tmp = TempDir::new().unwrap();
    let out = bapsim(&["run", "--scenario", "/nonexistent/x.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_outputs_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let before = fs::read(&path).unwrap();

    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = bapsim(
            &["run", "--scenario", path.to_str().unwrap(), "--out", dir.to_str().unwrap()],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", stderr(&out));
        for f in ["scenario.resolved.toml", "events.ndjson", "blocks.csv", "summary.json"] {
            assert!(dir.join(f).is_file(), "{f} missing");
        }
        assert!(!dir.join(INCOMPLETE_MARKER).exists());
    }
    assert_eq!(fs::read(a.join("events.ndjson")).unwrap(), fs::read(b.join("events.ndjson")).unwrap());
    assert_eq!(fs::read(a.join("summary.json")).unwrap(), fs::read(b.join("summary.json")).unwrap());
    assert_eq!(fs::read(&path).unwrap(), before, "input scenario was modified");

    let summary: Value = serde_json::from_slice(&fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["seed"], 11);
    assert!(summary["blocks_found"].as_u64().unwrap() > 0);
    let csv = fs::read_to_string(a.join("blocks.csv")).unwrap();
    assert!(csv.starts_with("block,finder,height,metric,value\n"));

    // The resolved file is itself a valid scenario describing the same run.
    let resolved = load_scenario(&a.join("scenario.resolved.toml")).unwrap();
    assert_eq!(resolved, load_scenario(&path).unwrap());
}

#[test]
fn default_out_dir_uses_env_root() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let root = tmp.path().join("root");
    let out = bapsim(
        &["run", "--scenario", path.to_str().unwrap(), "--seed", "5", "--strategy", "baseline"],
        &root,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dir = root.join("fast-baseline-full-block-s5");
    assert!(dir.join("summary.json").is_file());
    let summary: Value = serde_json::from_slice(&fs::read(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["strategy"], "baseline-full-block");
}

#[test]
fn compare_writes_each_strategy() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let out_dir = tmp.path().join("cmp");
    let out = bapsim(
        &["compare", "--scenario", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_dir.join("baseline-full-block/summary.json").is_file());
    assert!(out_dir.join("advert-protocol/summary.json").is_file());
    let cmp: Value = serde_json::from_slice(&fs::read(out_dir.join("comparison.json")).unwrap()).unwrap();
    let entries = cmp["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["latency_ratio"], 1.0);
}

#[test]
fn compare_rejects_repeated_strategy() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let out = bapsim(
        &["compare", "--scenario", path.to_str().unwrap(), "--strategy", "advert", "--strategy", "advert"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bandwidth_sweep_makes_one_dir_per_value() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let out_dir = tmp.path().join("sweep");
    let out = bapsim(
        &[
            "sweep",
            "--scenario",
            path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--sweep",
            "links.bandwidth_bytes_per_sec=1e5,1e6,1e7",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let dirs: Vec<_> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_dir())
        .collect();
    assert_eq!(dirs.len(), 3);
    let sweep: Value = serde_json::from_slice(&fs::read(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(sweep.as_array().unwrap().len(), 3);
    for d in dirs {
        let resolved = load_scenario(&d.path().join("scenario.resolved.toml")).unwrap();
        let bw = resolved.links.bandwidth_bytes_per_sec;
        assert!([1e5, 1e6, 1e7].iter().any(|v| bw == Dist::Fixed(*v)), "{bw:?}");
    }
}

#[test]
fn sweep_value_of_wrong_type_exits_two() {
    let tmp = TempDir::new().unwrap();
    let path = write_scenario(tmp.path(), "fast.toml", FAST);
    let out =
        bapsim(&["sweep", "--scenario", path.to_str().unwrap(), "--sweep", "node_count=3,many"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("node_count"), "{}", stderr(&out));
    assert!(!tmp.path().join("fast-sweep-s11").exists(), "ran before validating every value");
}

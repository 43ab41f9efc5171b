use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use bap_core::metrics::{analyze, write_blocks_csv, Summary};
use bap_core::simnet::{run_scenario, RelayStrategy, Scenario};
use serde::Serialize;

use crate::config::{scenario_from_table, set_path, to_toml, SweepSpec};
use crate::error::CliError;

pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

/// Runs one scenario and writes `scenario.resolved.toml`, `events.ndjson`,
/// `blocks.csv` and `summary.json` into `dir`. An `INCOMPLETE` file marks the
/// directory until every output is written.
pub fn run_into(scenario: &Scenario, dir: &Path) -> Result<Summary, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let marker = dir.join(INCOMPLETE_MARKER);
    fs::write(&marker, "run in progress or failed\n").map_err(|e| CliError::io(marker.display(), e))?;

    write(dir, "scenario.resolved.toml", to_toml(scenario)?.as_bytes())?;
    let log = run_scenario(scenario).map_err(|e| CliError::Runtime(e.to_string()))?;
    let events = dir.join("events.ndjson");
    log.write_ndjson(BufWriter::new(create(&events)?)).map_err(|e| CliError::io(events.display(), e))?;

    let metrics = analyze(&log);
    let csv = dir.join("blocks.csv");
    write_blocks_csv(&metrics.rows, BufWriter::new(create(&csv)?))
        .map_err(|e| CliError::io(csv.display(), e))?;
    let summary = Summary::new(&metrics, log.start());
    write_json(dir, "summary.json", &summary)?;

    fs::remove_file(&marker).map_err(|e| CliError::io(marker.display(), e))?;
    Ok(summary)
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(path.display(), e))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(path.display(), e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write(dir, name, text.as_bytes())
}

/// Runs jobs on scoped threads, one per job, and returns results in order.
fn parallel<T: Send, R: Send>(jobs: Vec<T>, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.into_iter().map(|job| s.spawn(|| f(job))).collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    })
}

#[derive(Debug, Serialize)]
pub struct ComparisonEntry {
    pub strategy: RelayStrategy,
    pub dir: PathBuf,
    pub summary: Summary,
    /// Mean adoption latency relative to the first strategy listed.
    pub latency_ratio: Option<f64>,
    pub wasted_fraction_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub seed: u64,
    pub entries: Vec<ComparisonEntry>,
}

/// Same scenario and seed under each strategy, one subdirectory each, plus
/// `comparison.json`.
pub fn compare(
    scenario: &Scenario,
    strategies: &[RelayStrategy],
    out: &Path,
) -> Result<Comparison, CliError> {
    let jobs: Vec<(RelayStrategy, PathBuf)> = strategies.iter().map(|s| (*s, out.join(s.as_str()))).collect();
    let results =
        parallel(jobs.clone(), |(strategy, dir)| run_into(&Scenario { strategy, ..scenario.clone() }, &dir));
    let summaries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let base = summaries.first().cloned();
    let ratio = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) if y > 0.0 => Some(x / y),
        _ => None,
    };
    let entries = jobs
        .into_iter()
        .zip(summaries)
        .map(|((strategy, dir), summary)| {
            let base = base.as_ref().expect("at least one strategy");
            ComparisonEntry {
                strategy,
                dir,
                latency_ratio: ratio(summary.latency.map(|d| d.mean), base.latency.map(|d| d.mean)),
                wasted_fraction_ratio: ratio(Some(summary.wasted_fraction), Some(base.wasted_fraction)),
                summary,
            }
        })
        .collect();
    let comparison = Comparison {
        schema_version: bap_core::metrics::METRICS_SCHEMA_VERSION,
        seed: scenario.seed,
        entries,
    };
    write_json(out, "comparison.json", &comparison)?;
    Ok(comparison)
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub value: toml::Value,
    pub dir: PathBuf,
    pub summary: Summary,
}

/// One run per sweep value, each in `<key>=<value>/`, plus `sweep.json`.
/// Every value is type-checked before anything runs.
pub fn sweep(
    base: &toml::Table,
    spec: &SweepSpec,
    scenario_path: &Path,
    overrides: impl Fn(&mut Scenario),
    out: &Path,
) -> Result<Vec<SweepEntry>, CliError> {
    let mut jobs = Vec::new();
    for value in &spec.values {
        let mut table = base.clone();
        set_path(&mut table, &spec.key, value.clone()).map_err(CliError::Usage)?;
        let mut scenario = scenario_from_table(table, scenario_path).map_err(|e| match e {
            CliError::Scenario { path, message } => {
                CliError::Scenario { path, message: format!("with {} = {value}: {message}", spec.key) }
            }
            other => other,
        })?;
        overrides(&mut scenario);
        let dir = out.join(format!("{}={}", spec.key, value_label(value)));
        jobs.push((value.clone(), scenario, dir));
    }
    let results = parallel(jobs, |(value, scenario, dir)| {
        run_into(&scenario, &dir).map(|summary| SweepEntry { value, dir, summary })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_json(out, "sweep.json", &entries)?;
    Ok(entries)
}

fn value_label(value: &toml::Value) -> String {
    match value {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
    .chars()
    .map(|c| if c.is_ascii_alphanumeric() || "._-+".contains(c) { c } else { '_' })
    .collect()
}

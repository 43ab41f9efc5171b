//! Command-line front end for the network simulator: load a scenario file,
//! run it (or a sweep, or a strategy comparison) and write the event log,
//! per-block CSV and JSON summary.

pub mod config;
pub mod error;
pub mod run;

use std::path::{Path, PathBuf};

use bap_core::simnet::{RelayStrategy, Scenario};
use clap::{Args, Parser, Subcommand};

pub use config::{load_scenario, SweepSpec};
pub use error::CliError;

/// Output root used when `--out` is absent.
pub const OUT_ENV: &str = "BAPSIM_OUT";
const DEFAULT_OUT_ROOT: &str = "runs";

#[derive(Debug, Parser)]
#[command(name = "bapsim", version, about = "Simulate block relay with and without block adverts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario.
    Run(RunArgs),
    /// Run the scenario once per value of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `key=v1,v2,...` where key is a dotted scenario path.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        sweep: SweepSpec,
    },
    /// Run the scenario under several relay strategies with the same seed.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Strategies to compare, first is the reference [default: baseline, advert].
        #[arg(long = "strategy", value_name = "STRATEGY")]
        strategies: Vec<RelayStrategy>,
    },
    /// Check a scenario file and print it with every default filled in.
    ValidateScenario {
        #[arg(long, value_name = "FILE")]
        scenario: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    /// Output directory [default: $BAPSIM_OUT/<scenario>-<strategy>-s<seed>].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Output root used when --out is absent.
    #[arg(long, env = OUT_ENV, default_value = DEFAULT_OUT_ROOT, hide_default_value = true)]
    pub out_root: PathBuf,
    /// Override the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Override the scenario's relay strategy (baseline, advert, late-advert).
    #[arg(long)]
    pub strategy: Option<RelayStrategy>,
}

impl CommonArgs {
    fn out_dir(&self, scenario: &Scenario, label: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let stem = self.scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
            self.out_root.join(format!("{stem}-{label}-s{}", scenario.seed))
        })
    }
}

fn apply(scenario: &mut Scenario, seed: Option<u64>, strategy: Option<RelayStrategy>) {
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(strategy) = strategy {
        scenario.strategy = strategy;
    }
}

/// Executes a parsed command, printing a short report to stdout.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let mut scenario = load_scenario(&args.common.scenario)?;
            apply(&mut scenario, args.common.seed, args.strategy);
            let dir = args.common.out_dir(&scenario, scenario.strategy.as_str());
            let summary = run::run_into(&scenario, &dir)?;
            println!("{}", describe(&dir, &summary));
        }
        Command::Sweep { run, sweep } => {
            let table = config::read_table(&run.common.scenario)?;
            // Validate the unswept file first so its own errors are reported plainly.
            let mut probe = config::scenario_from_table(table.clone(), &run.common.scenario)?;
            apply(&mut probe, run.common.seed, run.strategy);
            let out = run.common.out_dir(&probe, "sweep");
            let entries = run::sweep(
                &table,
                &sweep,
                &run.common.scenario,
                |s| apply(s, run.common.seed, run.strategy),
                &out,
            )?;
            for entry in &entries {
                println!("{}", describe(&entry.dir, &entry.summary));
            }
            println!("wrote {}", out.join("sweep.json").display());
        }
        Command::Compare { common, mut strategies } => {
            let mut scenario = load_scenario(&common.scenario)?;
            apply(&mut scenario, common.seed, None);
            if strategies.is_empty() {
                strategies = vec![RelayStrategy::BaselineFullBlock, RelayStrategy::AdvertProtocol];
            }
            let mut seen = std::collections::HashSet::new();
            if let Some(dup) = strategies.iter().find(|s| !seen.insert(**s)) {
                return Err(CliError::Usage(format!("strategy `{}` given twice", dup.as_str())));
            }
            let out = common.out_dir(&scenario, "compare");
            let comparison = run::compare(&scenario, &strategies, &out)?;
            for entry in &comparison.entries {
                println!("{}", describe(&entry.dir, &entry.summary));
            }
            println!("wrote {}", out.join("comparison.json").display());
        }
        Command::ValidateScenario { scenario } => {
            let resolved = load_scenario(&scenario)?;
            print!("{}", config::to_toml(&resolved)?);
        }
    }
    Ok(())
}

fn describe(dir: &Path, s: &bap_core::metrics::Summary) -> String {
    let latency = s.latency.map_or("n/a".to_string(), |d| format!("{:.3} s", d.mean));
    let stale = s.stale_rate.map_or("n/a".to_string(), |r| format!("{r:.3}"));
    format!(
        "{}: {} blocks, mean adoption latency {latency}, stale rate {stale}, wasted {:.5}",
        dir.display(),
        s.blocks_found,
        s.wasted_fraction
    )
}

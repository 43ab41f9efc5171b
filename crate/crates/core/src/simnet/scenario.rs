use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{CompactTarget, MAX_BLOCK_SIZE_BYTES};
use crate::size::max_txs_per_block;
use crate::tx::{CoinbaseTransaction, DEFAULT_COINBASE_SIZE, DEFAULT_TX_SIZE};

pub const SCHEMA_VERSION: u32 = 1;

/// How a node disseminates the blocks it mines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelayStrategy {
    /// Send the whole block once it is found.
    #[serde(alias = "baseline")]
    BaselineFullBlock,
    /// Advertise the transaction list when mining starts; relay a seed when found.
    #[default]
    #[serde(alias = "advert")]
    AdvertProtocol,
    /// Send advert and seed back to back once the block is found.
    LateAdvert,
}

impl RelayStrategy {
    pub const ALL: [RelayStrategy; 3] =
        [RelayStrategy::BaselineFullBlock, RelayStrategy::AdvertProtocol, RelayStrategy::LateAdvert];

    pub fn as_str(self) -> &'static str {
        match self {
            RelayStrategy::BaselineFullBlock => "baseline-full-block",
            RelayStrategy::AdvertProtocol => "advert-protocol",
            RelayStrategy::LateAdvert => "late-advert",
        }
    }
}

impl fmt::Display for RelayStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelayStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "baseline" | "baseline-full-block" => Ok(RelayStrategy::BaselineFullBlock),
            "advert" | "advert-protocol" => Ok(RelayStrategy::AdvertProtocol),
            "late-advert" => Ok(RelayStrategy::LateAdvert),
            other => Err(format!("unknown strategy `{other}` (expected baseline, advert or late-advert)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Topology {
    Ring,
    /// Random `degree`-regular graph; the degree is capped at `node_count - 1`.
    RandomRegular {
        degree: usize,
    },
    Complete,
    Explicit {
        edges: Vec<(usize, usize)>,
    },
}

impl Default for Topology {
    fn default() -> Self {
        Topology::RandomRegular { degree: 4 }
    }
}

/// A per-link parameter distribution. In scenario files a bare number means
/// `Fixed`; `{ uniform = [lo, hi] }` draws each link's value uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "DistRepr", into = "DistRepr")]
pub enum Dist {
    Fixed(f64),
    Uniform([f64; 2]),
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum DistRepr {
    Value(f64),
    Tagged(TaggedDist),
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
enum TaggedDist {
    Fixed(f64),
    Uniform([f64; 2]),
}

impl From<DistRepr> for Dist {
    fn from(repr: DistRepr) -> Self {
        match repr {
            DistRepr::Value(v) | DistRepr::Tagged(TaggedDist::Fixed(v)) => Dist::Fixed(v),
            DistRepr::Tagged(TaggedDist::Uniform(range)) => Dist::Uniform(range),
        }
    }
}

impl From<Dist> for DistRepr {
    fn from(dist: Dist) -> Self {
        match dist {
            Dist::Fixed(v) => DistRepr::Value(v),
            Dist::Uniform(range) => DistRepr::Tagged(TaggedDist::Uniform(range)),
        }
    }
}

impl Dist {
    fn check(&self, field: &'static str, allow_zero: bool) -> Result<(), ScenarioError> {
        let ok = |v: f64| v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        let valid = match *self {
            Dist::Fixed(v) => ok(v),
            Dist::Uniform([lo, hi]) => ok(lo) && ok(hi) && lo <= hi,
        };
        if valid {
            Ok(())
        } else {
            let need = if allow_zero { "non-negative" } else { "positive" };
            Err(ScenarioError::invalid(field, format!("must be finite and {need}, got {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkModel {
    #[serde(default = "defaults::latency")]
    pub latency_secs: Dist,
    #[serde(default = "defaults::bandwidth")]
    pub bandwidth_bytes_per_sec: Dist,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel { latency_secs: defaults::latency(), bandwidth_bytes_per_sec: defaults::bandwidth() }
    }
}

/// Poisson transaction arrivals at uniformly chosen nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxWorkload {
    #[serde(default = "defaults::tx_rate")]
    pub rate_per_sec: f64,
    #[serde(default = "defaults::tx_size")]
    pub size_bytes: u32,
}

impl Default for TxWorkload {
    fn default() -> Self {
        TxWorkload { rate_per_sec: defaults::tx_rate(), size_bytes: defaults::tx_size() }
    }
}

/// Declarative experiment description. Every field except `node_count` has a
/// default; the defaults describe a 16-node network producing one ~2000
/// transaction block every ten minutes over 50 ms, 1 MB/s links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "defaults::schema")]
    pub schema_version: u32,
    pub node_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strategy: RelayStrategy,
    #[serde(default = "defaults::horizon")]
    pub horizon_secs: f64,
    /// Difficulty driving the mining-time model.
    #[serde(default = "defaults::difficulty_bits")]
    pub difficulty_bits: u32,
    /// Difficulty actually solved in simulated block headers.
    #[serde(default = "defaults::header_pow_bits")]
    pub header_pow_bits: u32,
    /// Per-node hash rate, used when `hash_rates` is absent.
    #[serde(default = "defaults::hash_rate")]
    pub hash_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash_rates: Option<Vec<f64>>,
    #[serde(default = "defaults::max_block_size")]
    pub max_block_size_bytes: u64,
    #[serde(default = "defaults::coinbase_size")]
    pub coinbase_size_bytes: u32,
    #[serde(default)]
    pub processing_delay_secs: f64,
    /// Nodes that never answer transaction requests.
    #[serde(default)]
    pub withholding_nodes: Vec<usize>,
    /// Stop starting new mining rounds after this time, letting the network drain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mining_cutoff_secs: Option<f64>,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default)]
    pub transactions: TxWorkload,
    #[serde(default)]
    pub links: LinkModel,
}

pub(crate) mod defaults {
    use super::*;

    pub fn schema() -> u32 {
        SCHEMA_VERSION
    }
    pub fn horizon() -> f64 {
        6000.0
    }
    pub fn difficulty_bits() -> u32 {
        20
    }
    pub fn header_pow_bits() -> u32 {
        8
    }
    /// 2^20 hashes per 600 s spread over 16 nodes.
    pub fn hash_rate() -> f64 {
        (1u64 << 20) as f64 / (600.0 * 16.0)
    }
    pub fn max_block_size() -> u64 {
        MAX_BLOCK_SIZE_BYTES
    }
    pub fn coinbase_size() -> u32 {
        DEFAULT_COINBASE_SIZE
    }
    /// 20% more than one full block every ten minutes, so blocks fill to the cap.
    pub fn tx_rate() -> f64 {
        2400.0 / 600.0
    }
    pub fn tx_size() -> u32 {
        DEFAULT_TX_SIZE
    }
    pub fn latency() -> Dist {
        Dist::Fixed(0.05)
    }
    pub fn bandwidth() -> Dist {
        Dist::Fixed(1_000_000.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("topology is disconnected")]
    Disconnected,
}

impl ScenarioError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ScenarioError::Invalid { field, reason: reason.into() }
    }
}

impl Scenario {
    /// A scenario with every default filled in.
    pub fn with_nodes(node_count: usize) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            node_count,
            seed: 0,
            strategy: RelayStrategy::default(),
            horizon_secs: defaults::horizon(),
            difficulty_bits: defaults::difficulty_bits(),
            header_pow_bits: defaults::header_pow_bits(),
            hash_rate: defaults::hash_rate(),
            hash_rates: None,
            max_block_size_bytes: defaults::max_block_size(),
            coinbase_size_bytes: defaults::coinbase_size(),
            processing_delay_secs: 0.0,
            withholding_nodes: Vec::new(),
            mining_cutoff_secs: None,
            topology: Topology::default(),
            transactions: TxWorkload::default(),
            links: LinkModel::default(),
        }
    }

    /// The default 16-node scenario: blocks of 1999 transactions of 500 B.
    pub fn reference(seed: u64, strategy: RelayStrategy) -> Self {
        Scenario { seed, strategy, ..Scenario::with_nodes(16) }
    }

    pub fn node_hash_rate(&self, node: usize) -> f64 {
        match &self.hash_rates {
            Some(rates) => rates[node],
            None => self.hash_rate,
        }
    }

    /// Most transactions a block can carry under the size cap.
    pub fn max_txs_per_block(&self) -> usize {
        max_txs_per_block(
            self.max_block_size_bytes,
            u64::from(self.coinbase_size_bytes),
            u64::from(self.transactions.size_bytes),
        )
    }

    /// Checks every field-level invariant. Connectivity is checked when the
    /// topology is built.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.node_count == 0 || self.node_count > u16::MAX as usize {
            return Err(ScenarioError::invalid("node_count", "must be between 1 and 65535"));
        }
        if !(self.horizon_secs.is_finite() && self.horizon_secs > 0.0) {
            return Err(ScenarioError::invalid("horizon_secs", "must be finite and positive"));
        }
        for (field, bits) in
            [("difficulty_bits", self.difficulty_bits), ("header_pow_bits", self.header_pow_bits)]
        {
            if CompactTarget::new(bits).is_err() {
                return Err(ScenarioError::invalid(field, "must be within [0, 256]"));
            }
        }
        if self.header_pow_bits > 24 {
            return Err(ScenarioError::invalid("header_pow_bits", "at most 24 (headers are really solved)"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.hash_rate) {
            return Err(ScenarioError::invalid("hash_rate", "must be finite and positive"));
        }
        if let Some(rates) = &self.hash_rates {
            if rates.len() != self.node_count {
                return Err(ScenarioError::invalid("hash_rates", "needs one entry per node"));
            }
            if !rates.iter().all(|r| positive(*r)) {
                return Err(ScenarioError::invalid("hash_rates", "every rate must be finite and positive"));
            }
        }
        if self.coinbase_size_bytes < CoinbaseTransaction::ENCODED_LEN {
            return Err(ScenarioError::invalid(
                "coinbase_size_bytes",
                format!("must be at least {}", CoinbaseTransaction::ENCODED_LEN),
            ));
        }
        if self.max_block_size_bytes < 80 + u64::from(self.coinbase_size_bytes) {
            return Err(ScenarioError::invalid("max_block_size_bytes", "too small for header and coinbase"));
        }
        if !(self.processing_delay_secs.is_finite() && self.processing_delay_secs >= 0.0) {
            return Err(ScenarioError::invalid("processing_delay_secs", "must be finite and non-negative"));
        }
        if let Some(&bad) = self.withholding_nodes.iter().find(|n| **n >= self.node_count) {
            return Err(ScenarioError::invalid("withholding_nodes", format!("node {bad} does not exist")));
        }
        if let Some(cutoff) = self.mining_cutoff_secs {
            if !(cutoff.is_finite() && cutoff >= 0.0) {
                return Err(ScenarioError::invalid("mining_cutoff_secs", "must be finite and non-negative"));
            }
        }
        if !positive(self.transactions.rate_per_sec) {
            return Err(ScenarioError::invalid("transactions.rate_per_sec", "must be finite and positive"));
        }
        // one input, one output
        if self.transactions.size_bytes < 77 {
            return Err(ScenarioError::invalid("transactions.size_bytes", "must be at least 77"));
        }
        self.links.latency_secs.check("links.latency_secs", true)?;
        self.links.bandwidth_bytes_per_sec.check("links.bandwidth_bytes_per_sec", false)?;
        if let Topology::RandomRegular { degree: 0 } = self.topology {
            if self.node_count > 1 {
                return Err(ScenarioError::invalid("topology.degree", "must be positive"));
            }
        }
        Ok(())
    }
}

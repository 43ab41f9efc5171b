//! Deterministic discrete-event simulation of a miner network.
//!
//! Events are processed in `(time, sequence)` order where the sequence is
//! assigned at scheduling time, so a run is a pure function of its
//! [`Scenario`]. Blocks, adverts and transactions spread by flooding with
//! per-node duplicate suppression; transaction requests and responses are
//! point to point.

mod engine;
mod log;
mod message;
mod scenario;
mod topology;

pub use engine::{run_scenario, GENESIS_TIME, PENDING_CAPACITY};
pub use log::{EventLog, LogRecord};
pub use message::{gossip_dedup_key, Message, MsgKind};
pub use scenario::{
    Dist, LinkModel, RelayStrategy, Scenario, ScenarioError, Topology, TxWorkload, SCHEMA_VERSION,
};
pub use topology::{transmission_delay, Link, Network, NodeId};

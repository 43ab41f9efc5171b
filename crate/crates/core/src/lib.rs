//! Block advertisement relay: a miner announces the ordered transaction list
//! of the block it is about to mine, then relays only a compact seed
//! (coinbase + header) once the proof of work is found. Peers rebuild the
//! block from the announced list and their own transaction store.
//!
//! The crate is organised bottom-up:
//!
//! * [`hash`], [`encode`], [`tx`], [`block`], [`merkle`], [`size`]: canonical
//!   domain types, digests, Merkle commitments and the wire-size model.
//! * [`mining`]: real nonce/extraNonce search for small targets and an
//!   exponential mining-time model for network-scale runs.
//! * [`protocol`]: adverts, the advert registry, mempool, chain state,
//!   block reconstruction and validation.
//! * [`simnet`]: the deterministic discrete-event network simulator and its
//!   three relay strategies.
//! * [`metrics`]: latency, stale rate, wasted hash power and byte accounting
//!   derived from simulator event logs.

pub mod block;
pub mod encode;
pub mod error;
pub mod hash;
pub mod merkle;
pub mod metrics;
pub mod mining;
pub mod protocol;
pub mod simnet;
pub mod size;
pub mod tx;

pub use block::{Block, BlockHeader, CompactTarget};
pub use error::Error;
pub use hash::{hash_bytes, Address, Hash};
pub use merkle::merkle_root;
pub use size::{serialized_size, WireSize};
pub use tx::{CoinbaseTransaction, OutPoint, Transaction, TxOut};

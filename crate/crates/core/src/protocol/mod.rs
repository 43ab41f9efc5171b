//! The block advertisement state machine.
//!
//! A miner publishes an [`Advert`] (its coinbase address, the ordered list of
//! transaction hashes it will mine, and the parent hash) before it starts
//! hashing. Peers register the advert, pull any transactions they lack, and
//! when the block is found they receive only a [`BlockSeed`]. The block is
//! rebuilt from the seed and the advertised list, then validated.

mod advert;
mod chain;
mod mempool;
mod node;
mod registry;
mod validate;

pub use advert::{
    make_advert, make_block_seed, missing_txs, select_transactions, Advert, BlockSeed, SelectionPolicy,
    TxRequest, TxResponse,
};
pub use chain::{genesis_block, AcceptOutcome, ChainState, TipUpdate, UtxoSet};
pub use mempool::{Mempool, MempoolReject, TxLookup};
pub use node::{BlockAcceptance, NodeState};
pub use registry::{AdvertRegistry, RegisterOutcome};
pub use validate::{
    reconstruct_block, validate_advertised, validate_block, validate_full_block, ReconstructError,
    ValidationVerdict,
};

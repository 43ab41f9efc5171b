use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::block::Block;
use crate::encode::Encode;
use crate::hash::{hash_bytes, Hash};
use crate::protocol::{Advert, BlockSeed, TxRequest, TxResponse};
use crate::size::WireSize;
use crate::tx::Transaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MsgKind {
    Transaction,
    Advert,
    TxRequest,
    TxResponse,
    BlockSeed,
    FullBlock,
}

impl MsgKind {
    pub const ALL: [MsgKind; 6] = [
        MsgKind::Transaction,
        MsgKind::Advert,
        MsgKind::TxRequest,
        MsgKind::TxResponse,
        MsgKind::BlockSeed,
        MsgKind::FullBlock,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MsgKind::Transaction => "transaction",
            MsgKind::Advert => "advert",
            MsgKind::TxRequest => "tx-request",
            MsgKind::TxResponse => "tx-response",
            MsgKind::BlockSeed => "block-seed",
            MsgKind::FullBlock => "full-block",
        }
    }

    fn tag(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for MsgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A simulator payload. Bodies are shared, never copied per hop.
#[derive(Debug, Clone)]
pub enum Message {
    Transaction(Arc<Transaction>),
    Advert(Arc<Advert>),
    TxRequest(Arc<TxRequest>),
    TxResponse(Arc<TxResponse>),
    BlockSeed(Arc<BlockSeed>),
    FullBlock(Arc<Block>),
}

impl Message {
    pub fn kind(&self) -> MsgKind {
        match self {
            Message::Transaction(_) => MsgKind::Transaction,
            Message::Advert(_) => MsgKind::Advert,
            Message::TxRequest(_) => MsgKind::TxRequest,
            Message::TxResponse(_) => MsgKind::TxResponse,
            Message::BlockSeed(_) => MsgKind::BlockSeed,
            Message::FullBlock(_) => MsgKind::FullBlock,
        }
    }

    /// Natural identifier: txid, advert digest, or block hash for seeds and
    /// full blocks. Requests and responses use the digest of their encoding.
    pub fn id(&self) -> Hash {
        match self {
            Message::Transaction(tx) => tx.txid(),
            Message::Advert(a) => a.id(),
            Message::TxRequest(r) => hash_bytes(&r.to_bytes()),
            Message::TxResponse(r) => hash_bytes(&r.to_bytes()),
            Message::BlockSeed(s) => s.block_hash(),
            Message::FullBlock(b) => b.hash(),
        }
    }
}

impl WireSize for Message {
    fn wire_size(&self) -> u64 {
        match self {
            Message::Transaction(tx) => tx.wire_size(),
            Message::Advert(a) => a.wire_size(),
            Message::TxRequest(r) => r.wire_size(),
            Message::TxResponse(r) => r.wire_size(),
            Message::BlockSeed(s) => s.wire_size(),
            Message::FullBlock(b) => b.wire_size(),
        }
    }
}

/// Network-wide identity of a message for flood suppression: the kind tag
/// followed by the message id, hashed.
pub fn gossip_dedup_key(message: &Message) -> Hash {
    dedup_key(message.kind(), &message.id())
}

pub(crate) fn dedup_key(kind: MsgKind, id: &Hash) -> Hash {
    let mut buf = [0u8; 33];
    buf[0] = kind.tag();
    buf[1..].copy_from_slice(&id.0);
    hash_bytes(&buf)
}

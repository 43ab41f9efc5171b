use serde::{Deserialize, Serialize};

use crate::encode::{put_bytes, put_i32, put_len, put_u16, put_u32, put_u64, Encode};
use crate::error::Error;
use crate::hash::{hash_bytes, Address, Hash};
use crate::merkle::merkle_root;
use crate::tx::{CoinbaseTransaction, Transaction};

pub const MAX_BLOCK_SIZE_BYTES: u64 = 1_000_000;
pub const BLOCK_VERSION: i32 = 1;

/// Difficulty expressed as a count of required leading zero bits in the
/// header hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct CompactTarget(u16);

impl CompactTarget {
    pub const MAX_BITS: u32 = 256;

    pub fn new(leading_zero_bits: u32) -> Result<Self, Error> {
        if leading_zero_bits > Self::MAX_BITS {
            return Err(Error::TargetOutOfRange(leading_zero_bits));
        }
        Ok(CompactTarget(leading_zero_bits as u16))
    }

    pub fn leading_zero_bits(self) -> u32 {
        u32::from(self.0)
    }

    pub fn is_met_by(self, hash: &Hash) -> bool {
        match self.0 {
            0 => true,
            256 => false,
            bits => hash.leading_zero_bits() >= u32::from(bits),
        }
    }

    /// Expected number of hash evaluations per solution, `2^bits`.
    pub fn expected_hashes(self) -> f64 {
        (self.0 as f64).exp2()
    }
}

impl TryFrom<u32> for CompactTarget {
    type Error = Error;

    fn try_from(bits: u32) -> Result<Self, Error> {
        CompactTarget::new(bits)
    }
}

impl From<CompactTarget> for u32 {
    fn from(t: CompactTarget) -> u32 {
        t.leading_zero_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub version: i32,
    pub prev_block_hash: Hash,
    pub merkle_root: Hash,
    pub timestamp: u64,
    pub difficulty_target: CompactTarget,
    pub nonce: u32,
}

impl BlockHeader {
    /// Size charged to a header by the wire-size model. The canonical
    /// encoding is two bytes longer because of the wide timestamp and target.
    pub const NOMINAL_SIZE: u64 = 80;
    pub const ENCODED_LEN: usize = 4 + 32 + 32 + 8 + 2 + 4;

    pub fn hash(&self) -> Hash {
        let mut buf = Vec::with_capacity(Self::ENCODED_LEN);
        self.encode(&mut buf);
        hash_bytes(&buf)
    }
}

impl Encode for BlockHeader {
    fn encode(&self, out: &mut Vec<u8>) {
        put_i32(out, self.version);
        put_bytes(out, &self.prev_block_hash.0);
        put_bytes(out, &self.merkle_root.0);
        put_u64(out, self.timestamp);
        put_u16(out, self.difficulty_target.0);
        put_u32(out, self.nonce);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub header: BlockHeader,
    pub coinbase: CoinbaseTransaction,
    pub transactions: Vec<Transaction>,
}

impl Block {
    pub fn hash(&self) -> Hash {
        self.header.hash()
    }

    pub fn coinbase_address(&self) -> Address {
        self.coinbase.coinbase_address
    }

    /// Txids of the non-coinbase transactions, in block order.
    pub fn txids(&self) -> Vec<Hash> {
        self.transactions.iter().map(Transaction::txid).collect()
    }

    pub fn compute_merkle_root(&self) -> Hash {
        let mut leaves = Vec::with_capacity(self.transactions.len() + 1);
        leaves.push(self.coinbase.txid());
        leaves.extend(self.transactions.iter().map(Transaction::txid));
        merkle_root(&leaves).expect("coinbase leaf is always present")
    }

    pub fn has_valid_merkle_root(&self) -> bool {
        self.compute_merkle_root() == self.header.merkle_root
    }
}

impl Encode for Block {
    fn encode(&self, out: &mut Vec<u8>) {
        self.header.encode(out);
        self.coinbase.encode(out);
        put_len(out, self.transactions.len());
        for tx in &self.transactions {
            tx.encode(out);
        }
    }
}

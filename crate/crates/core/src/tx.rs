use crate::encode::{put_bytes, put_len, put_u32, put_u64, Encode};
use crate::error::Error;
use crate::hash::{hash_bytes, Address, Hash};

/// Typical transaction size on the wire.
pub const DEFAULT_TX_SIZE: u32 = 500;
pub const DEFAULT_COINBASE_SIZE: u32 = 200;
pub const DEFAULT_BLOCK_REWARD: u64 = 50;

const TX_TAG: u8 = 0x00;
const COINBASE_TAG: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutPoint {
    pub txid: Hash,
    pub index: u32,
}

impl OutPoint {
    pub fn new(txid: Hash, index: u32) -> Self {
        OutPoint { txid, index }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxOut {
    pub address: Address,
    pub value: u64,
}

/// An ordinary value transfer. Immutable once built; the txid covers every
/// field, so there is no malleable part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    inputs: Vec<OutPoint>,
    outputs: Vec<TxOut>,
    nominal_size_bytes: u32,
    txid: Hash,
}

impl Transaction {
    pub fn new(inputs: Vec<OutPoint>, outputs: Vec<TxOut>, nominal_size_bytes: u32) -> Result<Self, Error> {
        if outputs.is_empty() {
            return Err(Error::NoOutputs);
        }
        let mut bytes = Vec::new();
        encode_tx(&inputs, &outputs, nominal_size_bytes, &mut bytes);
        let floor = bytes.len() as u32;
        if nominal_size_bytes < floor {
            return Err(Error::NominalSizeTooSmall { nominal: nominal_size_bytes, floor });
        }
        Ok(Transaction { txid: hash_bytes(&bytes), inputs, outputs, nominal_size_bytes })
    }

    /// Builds a transaction whose nominal size equals its encoded length.
    pub fn sized_to_fit(inputs: Vec<OutPoint>, outputs: Vec<TxOut>) -> Result<Self, Error> {
        let floor = 1 + 4 + 36 * inputs.len() + 4 + 28 * outputs.len() + 4;
        Self::new(inputs, outputs, floor as u32)
    }

    pub fn txid(&self) -> Hash {
        self.txid
    }

    pub fn inputs(&self) -> &[OutPoint] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[TxOut] {
        &self.outputs
    }

    pub fn nominal_size_bytes(&self) -> u32 {
        self.nominal_size_bytes
    }

    pub fn output_value(&self) -> u64 {
        self.outputs.iter().map(|o| o.value).sum()
    }

    /// Outpoints created by this transaction.
    pub fn created(&self) -> impl Iterator<Item = (OutPoint, TxOut)> + '_ {
        self.outputs.iter().enumerate().map(|(i, out)| (OutPoint::new(self.txid, i as u32), *out))
    }
}

impl Encode for Transaction {
    fn encode(&self, out: &mut Vec<u8>) {
        encode_tx(&self.inputs, &self.outputs, self.nominal_size_bytes, out);
    }
}

fn encode_tx(inputs: &[OutPoint], outputs: &[TxOut], nominal: u32, out: &mut Vec<u8>) {
    out.push(TX_TAG);
    put_len(out, inputs.len());
    for input in inputs {
        put_bytes(out, &input.txid.0);
        put_u32(out, input.index);
    }
    put_len(out, outputs.len());
    for output in outputs {
        put_bytes(out, &output.address.0);
        put_u64(out, output.value);
    }
    put_u32(out, nominal);
}

/// Input-less transaction paying the block reward to the miner. `extra_nonce`
/// is the only field a miner may roll once the block's transaction list is
/// fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinbaseTransaction {
    pub coinbase_address: Address,
    pub reward: u64,
    pub extra_nonce: u64,
    nominal_size_bytes: u32,
}

impl CoinbaseTransaction {
    /// Encoded length: tag, address, reward, extra nonce, nominal size.
    pub const ENCODED_LEN: u32 = 1 + 20 + 8 + 8 + 4;

    pub fn new(
        coinbase_address: Address,
        reward: u64,
        extra_nonce: u64,
        nominal_size_bytes: u32,
    ) -> Result<Self, Error> {
        if nominal_size_bytes < Self::ENCODED_LEN {
            return Err(Error::NominalSizeTooSmall { nominal: nominal_size_bytes, floor: Self::ENCODED_LEN });
        }
        Ok(CoinbaseTransaction { coinbase_address, reward, extra_nonce, nominal_size_bytes })
    }

    pub fn txid(&self) -> Hash {
        hash_bytes(&self.to_bytes())
    }

    pub fn nominal_size_bytes(&self) -> u32 {
        self.nominal_size_bytes
    }

    pub fn with_extra_nonce(&self, extra_nonce: u64) -> Self {
        CoinbaseTransaction { extra_nonce, ..self.clone() }
    }

    pub fn output(&self) -> (OutPoint, TxOut) {
        (OutPoint::new(self.txid(), 0), TxOut { address: self.coinbase_address, value: self.reward })
    }
}

impl Encode for CoinbaseTransaction {
    fn encode(&self, out: &mut Vec<u8>) {
        out.push(COINBASE_TAG);
        put_bytes(out, &self.coinbase_address.0);
        put_u64(out, self.reward);
        put_u64(out, self.extra_nonce);
        put_u32(out, self.nominal_size_bytes);
    }
}

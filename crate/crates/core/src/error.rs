use thiserror::Error;

use crate::hash::Hash;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("merkle tree needs at least one leaf")]
    EmptyMerkleTree,
    #[error("transaction has no outputs")]
    NoOutputs,
    #[error("nominal size {nominal} is below the serialized size {floor}")]
    NominalSizeTooSmall { nominal: u32, floor: u32 },
    #[error("difficulty target of {0} leading zero bits is out of range [0, 256]")]
    TargetOutOfRange(u32),
    #[error("block of {size} bytes exceeds the {max} byte cap")]
    BlockTooLarge { size: u64, max: u64 },
    #[error("advert lists transaction {0} more than once")]
    DuplicateAdvertTx(Hash),
    #[error("block seed coinbase pays a different address than the seed names")]
    SeedAddressMismatch,
    #[error("hash rate must be positive and finite")]
    InvalidHashRate,
    #[error("mining budget must be positive")]
    ZeroBudget,
    #[error("template transaction is missing from the supplied set: {0}")]
    UnknownTemplateTx(Hash),
}

use crate::error::Error;
use crate::hash::{hash_pair, Hash};

/// Bitcoin-style Merkle root: adjacent nodes are paired and hashed, the last
/// node of an odd level is paired with itself, and a single leaf is its own
/// root.
pub fn merkle_root(leaves: &[Hash]) -> Result<Hash, Error> {
    if leaves.is_empty() {
        return Err(Error::EmptyMerkleTree);
    }
    let mut level = leaves.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            let right = pair.get(1).unwrap_or(&pair[0]);
            next.push(hash_pair(&pair[0], right));
        }
        level = next;
    }
    Ok(level[0])
}

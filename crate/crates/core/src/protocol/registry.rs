use std::collections::BTreeMap;

use crate::hash::{Address, Hash};
use crate::protocol::advert::Advert;
use crate::protocol::chain::ChainState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterOutcome {
    Registered,
    DuplicateRejected,
}

/// Known adverts, at most one per (miner address, parent hash). The first
/// advert seen for a pair is kept for good.
#[derive(Debug, Clone, Default)]
pub struct AdvertRegistry {
    entries: BTreeMap<(Address, Hash), Advert>,
}

impl AdvertRegistry {
    pub fn register(&mut self, advert: Advert) -> RegisterOutcome {
        use std::collections::btree_map::Entry;
        match self.entries.entry((advert.coinbase_address, advert.prev_block_hash)) {
            Entry::Occupied(_) => RegisterOutcome::DuplicateRejected,
            Entry::Vacant(slot) => {
                slot.insert(advert);
                RegisterOutcome::Registered
            }
        }
    }

    pub fn get(&self, address: &Address, prev_block_hash: &Hash) -> Option<&Advert> {
        self.entries.get(&(*address, *prev_block_hash))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Advert> {
        self.entries.values()
    }

    /// Drops adverts building on a known block two or more blocks below the
    /// tip. Adverts on unknown parents are kept.
    pub fn prune(&mut self, chain: &ChainState) {
        let tip_height = chain.height();
        self.entries.retain(|(_, prev), _| match chain.height_of(prev) {
            Some(h) => h + 2 > tip_height,
            None => true,
        });
    }
}

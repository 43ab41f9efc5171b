use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::block::{Block, BlockHeader, CompactTarget, BLOCK_VERSION};
use crate::hash::{Address, Hash};
use crate::tx::{CoinbaseTransaction, OutPoint, Transaction, TxOut};

pub type UtxoSet = HashMap<OutPoint, TxOut>;

/// Genesis block paying `funding` through a single input-less transaction.
pub fn genesis_block(funding: Vec<TxOut>, timestamp: u64) -> Block {
    let coinbase = CoinbaseTransaction::new(Address::default(), 0, 0, CoinbaseTransaction::ENCODED_LEN)
        .expect("encoded length meets the floor");
    let transactions = if funding.is_empty() {
        Vec::new()
    } else {
        vec![Transaction::sized_to_fit(Vec::new(), funding).expect("non-empty outputs")]
    };
    let mut block = Block {
        header: BlockHeader {
            version: BLOCK_VERSION,
            prev_block_hash: Hash::ZERO,
            merkle_root: Hash::ZERO,
            timestamp,
            difficulty_target: CompactTarget::new(0).expect("in range"),
            nonce: 0,
        },
        coinbase,
        transactions,
    };
    block.header.merkle_root = block.compute_merkle_root();
    block
}

#[derive(Debug, Clone)]
struct StoredBlock {
    block: Arc<Block>,
    height: u64,
}

/// Tip movement caused by accepting a block. `disconnected` runs from the old
/// tip downward, `connected` from the fork point upward.
#[derive(Debug, Clone, Default)]
pub struct TipUpdate {
    pub disconnected: Vec<Arc<Block>>,
    pub connected: Vec<Arc<Block>>,
}

#[derive(Debug, Clone)]
pub enum AcceptOutcome {
    AlreadyKnown,
    /// Stored, but the current tip has at least as much work.
    SideBranch,
    NewTip(TipUpdate),
}

/// Validated block history with the UTXO set of the active chain. Fork choice
/// is longest chain; at equal height the block received first stays tip.
#[derive(Debug, Clone)]
pub struct ChainState {
    blocks: HashMap<Hash, StoredBlock>,
    active: Vec<Hash>,
    utxo: UtxoSet,
    undo: HashMap<Hash, Vec<(OutPoint, TxOut)>>,
}

impl ChainState {
    pub fn new(genesis: Block) -> Self {
        let hash = genesis.hash();
        let mut utxo = UtxoSet::default();
        let undo = connect(&mut utxo, &genesis);
        let mut blocks = HashMap::new();
        blocks.insert(hash, StoredBlock { block: Arc::new(genesis), height: 0 });
        ChainState { blocks, active: vec![hash], utxo, undo: HashMap::from([(hash, undo)]) }
    }

    pub fn tip(&self) -> Hash {
        *self.active.last().expect("genesis is always active")
    }

    pub fn height(&self) -> u64 {
        (self.active.len() - 1) as u64
    }

    pub fn genesis(&self) -> Hash {
        self.active[0]
    }

    pub fn utxo(&self) -> &UtxoSet {
        &self.utxo
    }

    pub fn contains(&self, hash: &Hash) -> bool {
        self.blocks.contains_key(hash)
    }

    pub fn get(&self, hash: &Hash) -> Option<&Arc<Block>> {
        self.blocks.get(hash).map(|s| &s.block)
    }

    pub fn height_of(&self, hash: &Hash) -> Option<u64> {
        self.blocks.get(hash).map(|s| s.height)
    }

    pub fn is_active(&self, hash: &Hash) -> bool {
        self.height_of(hash).and_then(|h| self.active.get(h as usize)).is_some_and(|a| a == hash)
    }

    /// Active chain hashes from genesis to tip.
    pub fn active_chain(&self) -> &[Hash] {
        &self.active
    }

    pub fn known_block_count(&self) -> usize {
        self.blocks.len()
    }

    /// The UTXO set as of `hash` being the tip, or `None` for unknown blocks.
    pub fn utxo_view_at(&self, hash: &Hash) -> Option<Cow<'_, UtxoSet>> {
        if *hash == self.tip() {
            return Some(Cow::Borrowed(&self.utxo));
        }
        let (fork, branch) = self.branch_to(hash)?;
        let mut view = self.utxo.clone();
        for active in self.active[fork as usize + 1..].iter().rev() {
            disconnect(&mut view, &self.blocks[active].block, &self.undo[active]);
        }
        for block in &branch {
            connect(&mut view, block);
        }
        Some(Cow::Owned(view))
    }

    /// Height of the last active ancestor of `hash` and the blocks above it,
    /// lowest first.
    fn branch_to(&self, hash: &Hash) -> Option<(u64, Vec<Arc<Block>>)> {
        let mut branch = Vec::new();
        let mut cursor = *hash;
        loop {
            let stored = self.blocks.get(&cursor)?;
            if self.is_active(&cursor) {
                branch.reverse();
                return Some((stored.height, branch));
            }
            branch.push(Arc::clone(&stored.block));
            cursor = stored.block.header.prev_block_hash;
        }
    }

    /// Stores an already-validated block whose parent is known and moves the
    /// tip if the block's branch is now strictly longer.
    ///
    /// Panics if the parent is unknown.
    pub fn accept(&mut self, block: Arc<Block>) -> AcceptOutcome {
        let hash = block.hash();
        if self.blocks.contains_key(&hash) {
            return AcceptOutcome::AlreadyKnown;
        }
        let parent_height =
            self.height_of(&block.header.prev_block_hash).expect("accepted block must extend a known block");
        let height = parent_height + 1;
        self.blocks.insert(hash, StoredBlock { block, height });
        if height <= self.height() {
            return AcceptOutcome::SideBranch;
        }
        let (fork, connected) = self.branch_to(&hash).expect("just stored");
        let mut disconnected = Vec::new();
        while self.height() > fork {
            let old = self.active.pop().expect("above fork");
            let undo = self.undo.remove(&old).expect("active blocks carry undo data");
            let old_block = Arc::clone(&self.blocks[&old].block);
            disconnect(&mut self.utxo, &old_block, &undo);
            disconnected.push(old_block);
        }
        for b in &connected {
            let undo = connect(&mut self.utxo, b);
            let h = b.hash();
            self.undo.insert(h, undo);
            self.active.push(h);
        }
        AcceptOutcome::NewTip(TipUpdate { disconnected, connected })
    }
}

/// Applies `block` to `utxo`, returning the outputs it spent.
fn connect(utxo: &mut UtxoSet, block: &Block) -> Vec<(OutPoint, TxOut)> {
    let (op, out) = block.coinbase.output();
    utxo.insert(op, out);
    let mut spent = Vec::new();
    for tx in &block.transactions {
        for input in tx.inputs() {
            if let Some(prev) = utxo.remove(input) {
                spent.push((*input, prev));
            }
        }
        utxo.extend(tx.created());
    }
    spent
}

fn disconnect(utxo: &mut UtxoSet, block: &Block, undo: &[(OutPoint, TxOut)]) {
    for tx in block.transactions.iter().rev() {
        for (op, _) in tx.created() {
            utxo.remove(&op);
        }
    }
    utxo.remove(&block.coinbase.output().0);
    utxo.extend(undo.iter().copied());
}

/// Applies the block's transactions in order on top of `base` without copying
/// it, and reports the first transaction that spends a missing output, spends
/// an output twice, or creates more value than it consumes.
pub(crate) fn first_invalid_tx(base: &UtxoSet, block: &Block) -> Option<Hash> {
    let mut spent: HashSet<OutPoint> = HashSet::new();
    let mut created: HashMap<OutPoint, TxOut> = HashMap::new();
    let (cb_op, cb_out) = block.coinbase.output();
    created.insert(cb_op, cb_out);
    for tx in &block.transactions {
        let mut value_in = 0u64;
        for input in tx.inputs() {
            let available = if let Some(out) = created.remove(input) {
                Some(out)
            } else if spent.insert(*input) {
                base.get(input).copied()
            } else {
                None
            };
            match available {
                Some(out) => value_in = value_in.saturating_add(out.value),
                None => return Some(tx.txid()),
            }
        }
        if tx.output_value() > value_in {
            return Some(tx.txid());
        }
        created.extend(tx.created());
    }
    None
}

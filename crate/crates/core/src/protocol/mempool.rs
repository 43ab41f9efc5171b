use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::hash::Hash;
use crate::protocol::chain::UtxoSet;
use crate::tx::{OutPoint, Transaction};

/// Anything that can resolve a txid to a transaction.
pub trait TxLookup {
    fn lookup_tx(&self, txid: &Hash) -> Option<&Transaction>;
}

impl TxLookup for HashMap<Hash, Arc<Transaction>> {
    fn lookup_tx(&self, txid: &Hash) -> Option<&Transaction> {
        self.get(txid).map(Arc::as_ref)
    }
}

impl TxLookup for HashMap<Hash, Transaction> {
    fn lookup_tx(&self, txid: &Hash) -> Option<&Transaction> {
        self.get(txid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MempoolReject {
    #[error("transaction already pooled")]
    AlreadyPooled,
    #[error("input {0:?} is not in the UTXO set")]
    MissingInput(OutPoint),
    #[error("input {0:?} spent twice within the transaction")]
    DuplicateInput(OutPoint),
    #[error("conflicts with pooled transaction {0}")]
    Conflict(Hash),
    #[error("outputs exceed inputs")]
    Overspend,
}

/// Unconfirmed transactions, each valid against the current tip and none
/// conflicting with another. Iteration follows arrival order.
#[derive(Debug, Clone, Default)]
pub struct Mempool {
    txs: HashMap<Hash, (u64, Arc<Transaction>)>,
    order: BTreeMap<u64, Hash>,
    spent: HashMap<OutPoint, Hash>,
    next_seq: u64,
}

impl Mempool {
    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn contains(&self, txid: &Hash) -> bool {
        self.txs.contains_key(txid)
    }

    pub fn get(&self, txid: &Hash) -> Option<&Arc<Transaction>> {
        self.txs.get(txid).map(|(_, tx)| tx)
    }

    /// Pooled transactions, oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Arc<Transaction>> {
        self.order.values().map(|h| &self.txs[h].1)
    }

    /// Which pooled transaction, if any, spends `outpoint`.
    pub fn spender_of(&self, outpoint: &OutPoint) -> Option<Hash> {
        self.spent.get(outpoint).copied()
    }

    pub fn insert(&mut self, tx: Arc<Transaction>, utxo: &UtxoSet) -> Result<(), MempoolReject> {
        let txid = tx.txid();
        if self.txs.contains_key(&txid) {
            return Err(MempoolReject::AlreadyPooled);
        }
        check_against_utxo(&tx, utxo)?;
        if let Some(other) = tx.inputs().iter().find_map(|op| self.spent.get(op)) {
            return Err(MempoolReject::Conflict(*other));
        }
        for op in tx.inputs() {
            self.spent.insert(*op, txid);
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.order.insert(seq, txid);
        self.txs.insert(txid, (seq, tx));
        Ok(())
    }

    pub fn remove(&mut self, txid: &Hash) -> Option<Arc<Transaction>> {
        let (seq, tx) = self.txs.remove(txid)?;
        self.order.remove(&seq);
        for op in tx.inputs() {
            self.spent.remove(op);
        }
        Some(tx)
    }

    /// Drops every pooled transaction that is no longer valid against `utxo`.
    /// Returns the dropped txids in arrival order.
    pub fn revalidate(&mut self, utxo: &UtxoSet) -> Vec<Hash> {
        let stale: Vec<Hash> =
            self.iter().filter(|tx| check_against_utxo(tx, utxo).is_err()).map(|tx| tx.txid()).collect();
        for txid in &stale {
            self.remove(txid);
        }
        stale
    }
}

impl TxLookup for Mempool {
    fn lookup_tx(&self, txid: &Hash) -> Option<&Transaction> {
        self.get(txid).map(Arc::as_ref)
    }
}

fn check_against_utxo(tx: &Transaction, utxo: &UtxoSet) -> Result<(), MempoolReject> {
    let mut seen = HashSet::with_capacity(tx.inputs().len());
    let mut value_in = 0u64;
    for op in tx.inputs() {
        if !seen.insert(*op) {
            return Err(MempoolReject::DuplicateInput(*op));
        }
        let out = utxo.get(op).ok_or(MempoolReject::MissingInput(*op))?;
        value_in = value_in.saturating_add(out.value);
    }
    if tx.output_value() > value_in {
        return Err(MempoolReject::Overspend);
    }
    Ok(())
}

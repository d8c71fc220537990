use std::collections::HashMap;

use chrono::{DateTime, Utc};

use super::{LedgerError, Transaction, Txid};
use crate::addr::Address;

/// Immutable transaction graph with per-address funding and spending indices.
///
/// Transactions are held in `(timestamp, txid)` order and index lists follow
/// the same order, so "first spend" and similar queries are deterministic.
#[derive(Debug, Clone, Default)]
pub struct TxGraph {
    txs: Vec<Transaction>,
    by_txid: HashMap<Txid, usize>,
    funding: HashMap<Address, Vec<usize>>,
    spending: HashMap<Address, Vec<usize>>,
    first_seen: HashMap<Address, DateTime<Utc>>,
}

impl TxGraph {
    /// Builds a graph. Re-ingesting an identical transaction is a no-op;
    /// a different transaction with a known txid is rejected. `position` in
    /// errors is the 1-based record index.
    pub fn ingest<I>(records: I) -> Result<Self, LedgerError>
    where
        I: IntoIterator<Item = Transaction>,
    {
        let mut unique: HashMap<Txid, Transaction> = HashMap::new();
        for (i, tx) in records.into_iter().enumerate() {
            tx.check().map_err(|reason| LedgerError::MalformedRecord {
                position: i + 1,
                reason,
            })?;
            match unique.get(&tx.txid) {
                Some(existing) if existing == &tx => {}
                Some(_) => return Err(LedgerError::ConflictingDuplicate(tx.txid)),
                None => {
                    unique.insert(tx.txid, tx);
                }
            }
        }
        let mut txs: Vec<Transaction> = unique.into_values().collect();
        txs.sort_by(|x, y| x.timestamp.cmp(&y.timestamp).then(x.txid.cmp(&y.txid)));

        let mut g = TxGraph {
            by_txid: HashMap::with_capacity(txs.len()),
            ..Default::default()
        };
        for (i, tx) in txs.iter().enumerate() {
            g.by_txid.insert(tx.txid, i);
            for (slots, index) in [(&tx.outputs, &mut g.funding), (&tx.inputs, &mut g.spending)] {
                for s in slots {
                    let list = index.entry(s.address.clone()).or_default();
                    if list.last() != Some(&i) {
                        list.push(i);
                    }
                }
            }
            for s in tx.inputs.iter().chain(&tx.outputs) {
                // Transactions arrive in time order, so the first write wins.
                g.first_seen.entry(s.address.clone()).or_insert(tx.timestamp);
            }
        }
        g.txs = txs;
        Ok(g)
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn tx(&self, txid: &Txid) -> Option<&Transaction> {
        self.by_txid.get(txid).map(|&i| &self.txs[i])
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn contains(&self, a: &Address) -> bool {
        self.first_seen.contains_key(a)
    }

    pub fn address_count(&self) -> usize {
        self.first_seen.len()
    }

    /// All addresses in canonical order.
    pub fn addresses(&self) -> Vec<&Address> {
        let mut v: Vec<_> = self.first_seen.keys().collect();
        v.sort();
        v
    }

    pub fn first_seen(&self, a: &Address) -> Option<DateTime<Utc>> {
        self.first_seen.get(a).copied()
    }

    /// Transactions paying `a`, oldest first.
    pub fn funding_txs<'a>(&'a self, a: &Address) -> impl Iterator<Item = &'a Transaction> + 'a {
        self.funding
            .get(a)
            .into_iter()
            .flatten()
            .map(move |&i| &self.txs[i])
    }

    /// Transactions spending from `a`, oldest first.
    pub fn spending_txs<'a>(&'a self, a: &Address) -> impl Iterator<Item = &'a Transaction> + 'a {
        self.spending
            .get(a)
            .into_iter()
            .flatten()
            .map(move |&i| &self.txs[i])
    }

    pub fn funding_count(&self, a: &Address) -> usize {
        self.funding.get(a).map_or(0, Vec::len)
    }

    pub fn spending_count(&self, a: &Address) -> usize {
        self.spending.get(a).map_or(0, Vec::len)
    }

    fn require(&self, a: &Address) -> Result<(), LedgerError> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(LedgerError::UnknownAddress(a.clone()))
        }
    }

    /// Sum of every output slot paying `a`.
    pub fn received_total(&self, a: &Address) -> Result<u64, LedgerError> {
        self.require(a)?;
        Ok(self.funding_txs(a).map(|tx| tx.value_to(a)).sum())
    }

    /// Sum of every input slot spending from `a`.
    pub fn sent_total(&self, a: &Address) -> Result<u64, LedgerError> {
        self.require(a)?;
        Ok(self.spending_txs(a).map(|tx| tx.value_from(a)).sum())
    }
}

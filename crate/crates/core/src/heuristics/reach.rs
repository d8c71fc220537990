use std::collections::{HashMap, HashSet};

use super::HeuristicError;
use crate::addr::Address;
use crate::labels::EntityResolver;
use crate::ledger::{TxGraph, Txid};

/// First leak address reached from a start address, with the chain of
/// transactions that got there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakHit {
    pub hops: u32,
    pub leak_address: Address,
    pub path: Vec<Txid>,
}

/// Breadth-first forward search over spending transactions. Hop `k` covers
/// outputs of transactions spent by addresses first reached at hop `k - 1`.
/// Addresses resolving to an exchange are never expanded; the start address
/// itself does not count as a leak hit.
pub fn leak_path(
    a: &Address,
    leak: &HashSet<Address>,
    g: &TxGraph,
    max_hops: u32,
    entities: &EntityResolver,
) -> Result<Option<LeakHit>, HeuristicError> {
    if !g.contains(a) {
        return Err(HeuristicError::UnknownAddress(a.clone()));
    }
    // address -> (tx that reached it, address that spent in that tx)
    let mut came_from: HashMap<&Address, (Txid, &Address)> = HashMap::new();
    let mut seen: HashSet<&Address> = HashSet::from([a]);
    let mut seen_tx: HashSet<Txid> = HashSet::new();
    let mut frontier: Vec<&Address> = vec![a];

    for hop in 1..=max_hops {
        let mut next = Vec::new();
        for &from in &frontier {
            for tx in g.spending_txs(from) {
                if !seen_tx.insert(tx.txid) {
                    continue;
                }
                for out in &tx.outputs {
                    let to = &out.address;
                    if !seen.insert(to) {
                        continue;
                    }
                    came_from.insert(to, (tx.txid, from));
                    if leak.contains(to) {
                        let mut path = Vec::new();
                        let mut cur = to;
                        while let Some(&(txid, prev)) = came_from.get(cur) {
                            path.push(txid);
                            cur = prev;
                        }
                        path.reverse();
                        return Ok(Some(LeakHit {
                            hops: hop,
                            leak_address: to.clone(),
                            path,
                        }));
                    }
                    if !entities.is_exchange(to) {
                        next.push(to);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        frontier = next;
    }
    Ok(None)
}

pub fn reaches_leak(
    a: &Address,
    leak: &HashSet<Address>,
    g: &TxGraph,
    max_hops: u32,
    entities: &EntityResolver,
) -> Result<bool, HeuristicError> {
    Ok(leak_path(a, leak, g, max_hops, entities)?.is_some())
}

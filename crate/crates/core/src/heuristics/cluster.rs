//! Co-spend clustering: addresses that appear together as inputs of one
//! transaction are merged, transitively.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::addr::Address;
use crate::ledger::TxGraph;

/// Disjoint-set forest with path halving and union by rank.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
        a
    }
}

/// Partition of every graph address into co-spend clusters. Each cluster is
/// keyed by its lexicographically smallest member.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoSpendClusters {
    representative: HashMap<Address, Address>,
    members: BTreeMap<Address, Vec<Address>>,
}

impl CoSpendClusters {
    pub fn representative(&self, a: &Address) -> Option<&Address> {
        self.representative.get(a)
    }

    pub fn same_cluster(&self, a: &Address, b: &Address) -> bool {
        match (self.representative(a), self.representative(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Members of the cluster containing `a`, sorted.
    pub fn members_of(&self, a: &Address) -> &[Address] {
        self.representative(a)
            .and_then(|r| self.members.get(r))
            .map_or(&[], Vec::as_slice)
    }

    /// Clusters in representative order; members sorted.
    pub fn clusters(&self) -> impl Iterator<Item = (&Address, &[Address])> {
        self.members.iter().map(|(r, m)| (r, m.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `address,representative,cluster_size` rows in address order.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["address", "representative", "cluster_size"])?;
        for (rep, members) in &self.members {
            for m in members {
                wtr.write_record([m.as_str(), rep.as_str(), &members.len().to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn cospend_clusters(g: &TxGraph) -> CoSpendClusters {
    let addresses = g.addresses();
    let index: HashMap<&Address, usize> = addresses.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut dsu = DisjointSet::new(addresses.len());
    for tx in g.transactions() {
        let mut inputs = tx.inputs.iter().map(|s| index[&s.address]);
        if let Some(first) = inputs.next() {
            for other in inputs {
                dsu.union(first, other);
            }
        }
    }
    // `addresses` is sorted, so the smallest index in a set is its smallest address.
    let mut smallest: HashMap<usize, usize> = HashMap::new();
    for i in 0..addresses.len() {
        let root = dsu.find(i);
        smallest.entry(root).or_insert(i);
    }
    let mut representative = HashMap::with_capacity(addresses.len());
    let mut members: BTreeMap<Address, Vec<Address>> = BTreeMap::new();
    for (i, a) in addresses.iter().enumerate() {
        let rep = addresses[smallest[&dsu.find(i)]];
        representative.insert((*a).clone(), rep.clone());
        members.entry(rep.clone()).or_default().push((*a).clone());
    }
    CoSpendClusters {
        representative,
        members,
    }
}

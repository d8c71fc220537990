//! Load annotation labels and entity tags, then resolve addresses through
//! co-spend clusters.

use chrono::{TimeZone, Utc};
use ransomtrace::addr::{Address, ScriptKind};
use ransomtrace::heuristics::cospend_clusters;
use ransomtrace::labels::{Category, EntityResolver, EntityStore, LabelStore};
use ransomtrace::ledger::{Transaction, TxGraph, TxSlot, Txid};

fn addr(n: u8) -> Address {
    Address::from_payload(ScriptKind::P2WPKH, &[n; 20]).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels_csv = format!(
        "address,category,alias,note,source\n\
         {},salary,bentley,,leak\n\
         {},reimbursement/salary,mango,,leak\n\
         {},ransom,,,crowdsourced\n",
        addr(1),
        addr(2),
        addr(3)
    );
    let labels = LabelStore::load(labels_csv.as_bytes())?;
    for c in [Category::Salary, Category::ReimbursementSalary, Category::RansomPayment] {
        println!("{c}: {} address(es)", labels.addresses_with(c).len());
    }

    // The exchange is tagged by one seed address; a co-spend links a second.
    let entities_csv = format!("address_or_cluster,entity,kind,risk\ncluster:{},Kraken,exchange,low\n", addr(10));
    let entities = EntityStore::load(entities_csv.as_bytes())?;
    let g = TxGraph::ingest([Transaction {
        txid: Txid([1; 32]),
        timestamp: Utc.with_ymd_and_hms(2021, 6, 1, 0, 0, 0).unwrap(),
        inputs: vec![TxSlot::new(addr(10), 50), TxSlot::new(addr(11), 50)],
        outputs: vec![TxSlot::new(addr(3), 100)],
        fee_sats: 0,
    }])?;
    let resolver = EntityResolver::new(&entities, Some(cospend_clusters(&g)));
    for n in [10, 11, 3] {
        let who = resolver.entity_of(&addr(n)).map_or("unlabelled".to_string(), |r| r.entity_name.clone());
        println!("{}: {who}", addr(n));
    }
    Ok(())
}

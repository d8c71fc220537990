//! Group addresses that co-sign transaction inputs and write the cluster table.

use chrono::{TimeZone, Utc};
use ransomtrace::addr::{Address, ScriptKind};
use ransomtrace::heuristics::cospend_clusters;
use ransomtrace::ledger::{Transaction, TxGraph, TxSlot, Txid};

fn addr(n: u8) -> Address {
    Address::from_payload(ScriptKind::P2PKH, &[n; 20]).unwrap()
}

fn spend(id: u8, ins: &[u8], out: u8) -> Transaction {
    Transaction {
        txid: Txid([id; 32]),
        timestamp: Utc.with_ymd_and_hms(2021, 2, 1, id as u32, 0, 0).unwrap(),
        inputs: ins.iter().map(|&a| TxSlot::new(addr(a), 1_000)).collect(),
        outputs: vec![TxSlot::new(addr(out), 1_000 * ins.len() as u64)],
        fee_sats: 0,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // {1,2} and {2,3} chain into one wallet; {4,5} is another; 9 stays alone.
    let g = TxGraph::ingest([spend(1, &[1, 2], 9), spend(2, &[2, 3], 9), spend(3, &[4, 5], 9)])?;
    let clusters = cospend_clusters(&g);
    println!("{} clusters", clusters.len());
    for (rep, members) in clusters.clusters() {
        println!("{rep}: {} member(s)", members.len());
    }
    clusters.write_csv(std::io::stdout())?;
    Ok(())
}

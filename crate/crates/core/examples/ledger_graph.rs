//! Build a transaction graph, round-trip it through JSONL and query it.

use chrono::{TimeZone, Utc};
use ransomtrace::addr::{Address, ScriptKind};
use ransomtrace::ledger::{read_transactions, write_transactions, Transaction, TxGraph, TxSlot, Txid, SATS_PER_BTC};

fn addr(n: u8) -> Address {
    Address::from_payload(ScriptKind::P2PKH, &[n; 20]).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = |d| Utc.with_ymd_and_hms(2021, 1, d, 0, 0, 0).unwrap();
    let txs = vec![
        Transaction {
            txid: Txid([1; 32]),
            timestamp: t(1),
            inputs: vec![],
            outputs: vec![TxSlot::new(addr(1), 2 * SATS_PER_BTC)],
            fee_sats: 0,
        },
        Transaction {
            txid: Txid([2; 32]),
            timestamp: t(2),
            inputs: vec![TxSlot::new(addr(1), 2 * SATS_PER_BTC)],
            outputs: vec![TxSlot::new(addr(2), SATS_PER_BTC), TxSlot::new(addr(3), SATS_PER_BTC - 1_000)],
            fee_sats: 1_000,
        },
    ];

    let mut jsonl = Vec::new();
    write_transactions(&mut jsonl, &txs)?;
    print!("{}", String::from_utf8_lossy(&jsonl));
    let g = TxGraph::ingest(read_transactions(jsonl.as_slice())?)?;

    println!("{} transactions over {} addresses", g.len(), g.address_count());
    for a in g.addresses() {
        println!(
            "{a}: first seen {}, received {} sats, sent {} sats",
            g.first_seen(a).unwrap(),
            g.received_total(a)?,
            g.sent_total(a)?
        );
    }
    Ok(())
}

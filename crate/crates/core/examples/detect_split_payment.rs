//! Run the three-part ransom detector on a small hand-built flow: an
//! exchange-funded payment split 25/75 whose affiliate share reaches a known
//! wallet two hops later.

use std::collections::HashSet;

use chrono::{DateTime, Duration, TimeZone, Utc};
use ransomtrace::addr::{Address, ScriptKind};
use ransomtrace::heuristics::{classify_ransom, cospend_clusters, DetectorParams};
use ransomtrace::labels::{EntityKey, EntityKind, EntityRecord, EntityResolver, EntityStore, Risk};
use ransomtrace::ledger::{Transaction, TxGraph, TxSlot, Txid, SATS_PER_BTC as BTC};

fn addr(n: u8) -> Address {
    Address::from_payload(ScriptKind::P2WPKH, &[n; 20]).unwrap()
}

fn tx(id: u8, t: DateTime<Utc>, ins: &[(u8, u64)], outs: &[(u8, u64)]) -> Transaction {
    let total = |s: &[(u8, u64)]| s.iter().map(|x| x.1).sum::<u64>();
    Transaction {
        txid: Txid([id; 32]),
        timestamp: t,
        inputs: ins.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
        outputs: outs.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
        fee_sats: if ins.is_empty() { 0 } else { total(ins) - total(outs) },
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (exchange, victim_pay, affiliate, operator, hop, known) = (1, 2, 3, 4, 5, 6);
    let day = Duration::days(1);
    let paid = Utc.with_ymd_and_hms(2020, 9, 14, 12, 0, 0).unwrap();
    let g = TxGraph::ingest([
        tx(1, paid - day * 10, &[], &[(exchange, 50 * BTC)]),
        tx(2, paid, &[(exchange, 50 * BTC)], &[(victim_pay, 22 * BTC), (exchange, 28 * BTC - 4_000)]),
        tx(3, paid + day, &[(victim_pay, 22 * BTC)], &[(affiliate, 55 * BTC / 10), (operator, 165 * BTC / 10 - 9_000)]),
        tx(4, paid + day * 2, &[(affiliate, 55 * BTC / 10)], &[(hop, 55 * BTC / 10 - 2_000)]),
        tx(5, paid + day * 5, &[(hop, 55 * BTC / 10 - 2_000)], &[(known, 55 * BTC / 10 - 4_000)]),
    ])?;
    let entities = EntityStore::from_records(vec![EntityRecord {
        key: EntityKey::Address(addr(exchange)),
        entity_name: "Gemini".into(),
        kind: EntityKind::Exchange,
        risk: Some(Risk::Low),
    }])?;
    let resolver = EntityResolver::new(&entities, Some(cospend_clusters(&g)));
    let leak = HashSet::from([addr(known)]);

    let v = classify_ransom(&addr(victim_pay), &leak, &g, &resolver, &DetectorParams::default())?;
    println!("positive:      {}", v.is_positive());
    println!("strain:        {:?}", v.strain);
    if let Some(s) = &v.split {
        println!("split:         {}% (residual {:.4} pp)", s.matched_percent, s.residual_pp);
    }
    if let Some(h) = &v.leak_hit {
        println!("leak reached:  {} in {} hops", h.leak_address, h.hops);
    }
    println!("clean funding: {:.3}", v.clean_fraction);
    Ok(())
}

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;

use super::{received_usd, EconError};
use crate::addr::Address;
use crate::heuristics::VerdictRow;
use crate::labels::{Category, EntityKind, EntityResolver, LabelSource, LabelStore, Risk};
use crate::ledger::TxGraph;
use crate::valuation::Valuer;

/// Funding origin of ransom payments, split into confirmed (annotated) and
/// likely (detected) addresses. Amounts are unrounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginRow {
    pub entity: String,
    pub kind: EntityKind,
    pub risk: Option<Risk>,
    pub confirmed_usd: Decimal,
    pub likely_usd: Decimal,
    pub total_usd: Decimal,
}

/// Attributes every credit to a ransom address across the entities of its
/// transaction inputs, in proportion to input value. Confirmed addresses
/// come from leak or crowdsourced ransom labels; likely ones are positive
/// verdicts not already confirmed. Unattributed value is left out.
pub fn origin_table(
    verdicts: &[VerdictRow],
    labels: &LabelStore,
    g: &TxGraph,
    entities: &EntityResolver,
    valuer: &Valuer,
) -> Result<Vec<OriginRow>, EconError> {
    let confirmed: BTreeSet<&Address> = labels
        .records()
        .iter()
        .filter(|r| {
            r.category == Category::RansomPayment
                && matches!(r.source, LabelSource::LeakAnnotation | LabelSource::CrowdsourcedDataset)
        })
        .map(|r| &r.address)
        .collect();
    let likely: BTreeSet<&Address> = verdicts
        .iter()
        .filter(|v| v.is_positive() && !confirmed.contains(&v.address))
        .map(|v| &v.address)
        .collect();

    let mut rows: BTreeMap<String, OriginRow> = BTreeMap::new();
    for (set, is_confirmed) in [(&confirmed, true), (&likely, false)] {
        for a in set.iter().copied() {
            for tx in g.funding_txs(a) {
                if tx.is_coinbase() {
                    continue;
                }
                let credit = valuer.usd_exact(tx.value_to(a), tx.timestamp)?;
                let total_in = Decimal::from(tx.total_in() as u64);
                for input in tx.inputs.iter().filter(|s| &s.address != a) {
                    let Some(rec) = entities.entity_of(&input.address) else {
                        continue;
                    };
                    let share = credit * Decimal::from(input.value_sats) / total_in;
                    let row = rows.entry(rec.entity_name.clone()).or_insert_with(|| OriginRow {
                        entity: rec.entity_name.clone(),
                        kind: rec.kind,
                        risk: rec.risk,
                        confirmed_usd: Decimal::ZERO,
                        likely_usd: Decimal::ZERO,
                        total_usd: Decimal::ZERO,
                    });
                    if is_confirmed {
                        row.confirmed_usd += share;
                    } else {
                        row.likely_usd += share;
                    }
                    row.total_usd += share;
                }
            }
        }
    }
    let mut rows: Vec<OriginRow> = rows.into_values().collect();
    rows.sort_by(|x, y| y.total_usd.cmp(&x.total_usd).then_with(|| x.entity.cmp(&y.entity)));
    Ok(rows)
}

/// USD received per alias across the addresses it claimed ownership of.
pub fn alias_earnings(
    labels: &LabelStore,
    g: &TxGraph,
    valuer: &Valuer,
) -> Result<BTreeMap<String, Decimal>, EconError> {
    let mut owned: BTreeMap<&str, BTreeSet<&Address>> = BTreeMap::new();
    for r in labels.records().iter().filter(|r| r.category == Category::ClaimedOwnership) {
        if let Some(alias) = r.owner_alias.as_deref().filter(|s| !s.is_empty()) {
            owned.entry(alias).or_default().insert(&r.address);
        }
    }
    let mut out = BTreeMap::new();
    for (alias, addrs) in owned {
        let mut usd = Decimal::ZERO;
        for a in addrs {
            usd += received_usd(a, g, valuer)?;
        }
        out.insert(alias.to_string(), usd);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::ScriptKind;
    use crate::heuristics::Strain;
    use crate::labels::{EntityKey, EntityRecord, EntityStore, LabelRecord, UNLABELED_CLUSTER};
    use crate::ledger::{Transaction, TxSlot, Txid, SATS_PER_BTC};
    use crate::valuation::{GapPolicy, RateTable};
    use chrono::NaiveDate;

    fn addr(n: u8) -> Address {
        Address::from_payload(ScriptKind::P2WPKH, &[n; 20]).unwrap()
    }

    fn rates() -> RateTable {
        let d = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
        RateTable::from_rows([(d, Decimal::from(40_000))]).unwrap()
    }

    fn at() -> chrono::DateTime<chrono::Utc> {
        chrono::DateTime::parse_from_rfc3339("2021-03-01T10:00:00Z").unwrap().into()
    }

    fn pay(id: u8, ins: &[(u8, u64)], outs: &[(u8, u64)]) -> Transaction {
        Transaction {
            txid: Txid([id; 32]),
            timestamp: at(),
            inputs: ins.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
            outputs: outs.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
            fee_sats: 0,
        }
    }

    fn entities() -> EntityResolver {
        let store = EntityStore::from_records(vec![
            EntityRecord {
                key: EntityKey::Address(addr(10)),
                entity_name: "Gemini".into(),
                kind: EntityKind::Exchange,
                risk: Some(Risk::Low),
            },
            EntityRecord {
                key: EntityKey::Address(addr(11)),
                entity_name: UNLABELED_CLUSTER.into(),
                kind: EntityKind::UnlabeledCluster,
                risk: None,
            },
        ])
        .unwrap();
        EntityResolver::new(&store, None)
    }

    fn ransom(n: u8) -> LabelRecord {
        LabelRecord {
            address: addr(n),
            category: Category::RansomPayment,
            source: LabelSource::LeakAnnotation,
            owner_alias: None,
            note: String::new(),
        }
    }

    #[test]
    fn all_gemini_is_one_row() {
        let g = TxGraph::ingest([pay(1, &[(10, SATS_PER_BTC)], &[(1, SATS_PER_BTC)])]).unwrap();
        let labels = LabelStore::from_records([ransom(1)]);
        let t = rates();
        let rows = origin_table(&[], &labels, &g, &entities(), &Valuer::new(&t, GapPolicy::Strict)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].entity, "Gemini");
        assert_eq!(rows[0].total_usd, Decimal::from(40_000));
        assert_eq!(rows[0].likely_usd, Decimal::ZERO);
    }

    #[test]
    fn seventy_thirty_apportionment() {
        // Confirmed address 1: 0.7 BTC cluster + 0.3 BTC Gemini in one tx.
        // Likely address 2: 1 BTC from an unknown sender, left out.
        let g = TxGraph::ingest([
            pay(1, &[(11, 70_000_000), (10, 30_000_000)], &[(1, 100_000_000)]),
            pay(2, &[(20, 100_000_000)], &[(2, 100_000_000)]),
        ])
        .unwrap();
        let labels = LabelStore::from_records([ransom(1)]);
        let verdicts = [VerdictRow {
            address: addr(2),
            verdict: "positive".into(),
            percent: Some(20),
            strain: Some(Strain::Conti),
            residual: None,
            evidence_txids: String::new(),
            reaches_leak: true,
            split_ok: true,
            source_ok: true,
            clean_fraction: "1.0".into(),
        }];
        let t = rates();
        let rows = origin_table(&verdicts, &labels, &g, &entities(), &Valuer::new(&t, GapPolicy::Strict)).unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.entity.as_str()).collect();
        assert_eq!(names, [UNLABELED_CLUSTER, "Gemini"]);
        assert_eq!(rows[0].total_usd, Decimal::from(28_000));
        assert_eq!(rows[1].total_usd, Decimal::from(12_000));
        assert!(rows.iter().all(|r| r.confirmed_usd + r.likely_usd == r.total_usd));
    }

    #[test]
    fn alias_sums() {
        let g = TxGraph::ingest([pay(1, &[(10, SATS_PER_BTC)], &[(1, SATS_PER_BTC)])]).unwrap();
        let own = |n: u8, alias: &str| LabelRecord {
            address: addr(n),
            category: Category::ClaimedOwnership,
            source: LabelSource::LeakAnnotation,
            owner_alias: Some(alias.into()),
            note: String::new(),
        };
        let labels = LabelStore::from_records([own(1, "tramp"), own(5, "mango")]);
        let t = rates();
        let e = alias_earnings(&labels, &g, &Valuer::new(&t, GapPolicy::Strict)).unwrap();
        assert_eq!(e["tramp"], Decimal::from(40_000));
        assert_eq!(e["mango"], Decimal::ZERO);
    }
}

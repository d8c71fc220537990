use std::collections::BTreeMap;
use std::fmt;

use super::HeuristicError;
use crate::addr::Address;
use crate::labels::{EntityKind, EntityRecord, EntityResolver, Risk};
use crate::ledger::{Transaction, TxGraph};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceKey {
    Entity(String),
    Unknown,
}

impl fmt::Display for SourceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKey::Entity(n) => f.write_str(n),
            SourceKey::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceShare {
    pub sats: f64,
    pub fraction: f64,
    pub kind: Option<EntityKind>,
    pub risk: Option<Risk>,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceAttribution {
    pub received_sats: u64,
    pub shares: BTreeMap<SourceKey, SourceShare>,
}

impl SourceAttribution {
    /// Share of received value from low-risk exchanges or the unlabelled cluster.
    pub fn clean_fraction(&self) -> f64 {
        self.shares.values().filter(|s| s.clean).map(|s| s.fraction).sum()
    }

    pub fn fraction_of(&self, key: &SourceKey) -> f64 {
        self.shares.get(key).map_or(0.0, |s| s.fraction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttributionMode {
    /// Each incoming transaction's value split across its input entities.
    #[default]
    OneHop,
    /// As `OneHop`, but value from unattributed inputs is traced back through
    /// their own funding up to `depth` further levels (haircut taint).
    Haircut { depth: u32 },
}

/// Splits `value` of `tx` across its inputs in proportion to input value.
pub fn input_shares(tx: &Transaction, value: f64) -> impl Iterator<Item = (&Address, f64)> + '_ {
    let total = tx.total_in() as f64;
    tx.inputs
        .iter()
        .map(move |s| (&s.address, value * s.value_sats as f64 / total))
}

fn add<'e>(
    map: &mut BTreeMap<SourceKey, (f64, Option<&'e EntityRecord>)>,
    key: SourceKey,
    sats: f64,
    rec: Option<&'e EntityRecord>,
) {
    let slot = map.entry(key).or_insert((0.0, rec));
    slot.0 += sats;
}

fn attribute_into<'e>(
    a: &Address,
    weight: f64,
    g: &TxGraph,
    entities: &'e EntityResolver,
    depth: u32,
    acc: &mut BTreeMap<SourceKey, (f64, Option<&'e EntityRecord>)>,
) {
    // `weight` is the amount to distribute in proportion to `a`'s receipts.
    let received: u64 = g.funding_txs(a).map(|tx| tx.value_to(a)).sum();
    if received == 0 {
        add(acc, SourceKey::Unknown, weight, None);
        return;
    }
    for tx in g.funding_txs(a) {
        let part = weight * tx.value_to(a) as f64 / received as f64;
        if tx.is_coinbase() {
            add(acc, SourceKey::Unknown, part, None);
            continue;
        }
        for (input, sats) in input_shares(tx, part) {
            match entities.entity_of(input) {
                Some(rec) => add(acc, SourceKey::Entity(rec.entity_name.clone()), sats, Some(rec)),
                None if depth > 0 && input != a => {
                    attribute_into(input, sats, g, entities, depth - 1, acc)
                }
                None => add(acc, SourceKey::Unknown, sats, None),
            }
        }
    }
}

/// Attributes `a`'s received value to the entities that funded it.
/// Fractions sum to one, with unattributed value in [`SourceKey::Unknown`].
pub fn source_attribution(
    a: &Address,
    g: &TxGraph,
    entities: &EntityResolver,
    mode: AttributionMode,
) -> Result<SourceAttribution, HeuristicError> {
    let received = g
        .received_total(a)
        .map_err(|_| HeuristicError::UnknownAddress(a.clone()))?;
    if received == 0 {
        return Err(HeuristicError::NothingReceived(a.clone()));
    }
    let depth = match mode {
        AttributionMode::OneHop => 0,
        AttributionMode::Haircut { depth } => depth,
    };
    let mut acc = BTreeMap::new();
    attribute_into(a, received as f64, g, entities, depth, &mut acc);
    let shares = acc
        .into_iter()
        .map(|(k, (sats, rec))| {
            (
                k,
                SourceShare {
                    sats,
                    fraction: sats / received as f64,
                    kind: rec.map(|r| r.kind),
                    risk: rec.and_then(|r| r.risk),
                    clean: rec.is_some_and(EntityRecord::is_clean_source),
                },
            )
        })
        .collect();
    Ok(SourceAttribution {
        received_sats: received,
        shares,
    })
}

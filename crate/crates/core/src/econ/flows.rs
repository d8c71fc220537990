use std::collections::BTreeMap;
use std::fmt;

use rust_decimal::Decimal;

use super::{primary_categories, EconError};
use crate::labels::{Bucket, Category, EntityResolver, LabelStore};
use crate::ledger::TxGraph;
use crate::valuation::Valuer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowNode {
    Source(Bucket),
    Category(Category),
    Destination(Bucket),
}

impl fmt::Display for FlowNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowNode::Source(b) => write!(f, "from {b}"),
            FlowNode::Category(c) => write!(f, "{c}"),
            FlowNode::Destination(b) => write!(f, "to {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: FlowNode,
    pub to: FlowNode,
    pub usd: Decimal,
}

/// Aggregated flows source bucket → category and category → destination
/// bucket. Weights are unrounded; rounding happens at export.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowReport {
    weights: BTreeMap<(FlowNode, FlowNode), Decimal>,
}

impl FlowReport {
    pub fn edges(&self) -> impl Iterator<Item = FlowEdge> + '_ {
        self.weights.iter().map(|(&(from, to), &usd)| FlowEdge { from, to, usd })
    }

    pub fn weight(&self, from: FlowNode, to: FlowNode) -> Decimal {
        self.weights.get(&(from, to)).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of weights into `node`.
    pub fn inflow(&self, node: FlowNode) -> Decimal {
        self.weights.iter().filter(|((_, t), _)| *t == node).map(|(_, w)| *w).sum()
    }

    /// Sum of weights out of `node`.
    pub fn outflow(&self, node: FlowNode) -> Decimal {
        self.weights.iter().filter(|((f, _), _)| *f == node).map(|(_, w)| *w).sum()
    }

    fn add(&mut self, from: FlowNode, to: FlowNode, usd: Decimal) {
        *self.weights.entry((from, to)).or_default() += usd;
    }
}

/// One-hop funding sources and spend destinations of every labelled
/// address, bucketed by entity kind and risk. Counterparties without an
/// entity are left out, as is change back to the labelled address.
pub fn flow_report(
    labels: &LabelStore,
    g: &TxGraph,
    entities: &EntityResolver,
    valuer: &Valuer,
) -> Result<FlowReport, EconError> {
    let mut report = FlowReport::default();
    for (a, category) in primary_categories(labels) {
        let cat = FlowNode::Category(category);
        for tx in g.funding_txs(a) {
            if tx.is_coinbase() {
                continue;
            }
            let credit = valuer.usd_exact(tx.value_to(a), tx.timestamp)?;
            let total_in = Decimal::from(tx.total_in() as u64);
            for input in tx.inputs.iter().filter(|s| &s.address != a) {
                if let Some(rec) = entities.entity_of(&input.address) {
                    let share = credit * Decimal::from(input.value_sats) / total_in;
                    report.add(FlowNode::Source(rec.bucket()), cat, share);
                }
            }
        }
        for tx in g.spending_txs(a) {
            // `a`'s portion of the spend, spread over outputs by value.
            let spent = valuer.usd_exact(tx.value_from(a), tx.timestamp)?;
            let total_in = Decimal::from(tx.total_in() as u64);
            for out in tx.outputs.iter().filter(|s| &s.address != a) {
                if let Some(rec) = entities.entity_of(&out.address) {
                    let share = spent * Decimal::from(out.value_sats) / total_in;
                    report.add(cat, FlowNode::Destination(rec.bucket()), share);
                }
            }
        }
    }
    Ok(report)
}

//! Income/expense accounting, funding-origin tables, per-alias earnings and
//! fund-flow aggregation, all valued at the historical daily close.

mod flows;
mod origins;
mod render;
mod summary;

use std::collections::{BTreeMap, BTreeSet};

use rust_decimal::Decimal;
use thiserror::Error;

pub use flows::{flow_report, FlowEdge, FlowNode, FlowReport};
pub use origins::{alias_earnings, origin_table, OriginRow};
pub use render::{Format, Report};
pub use summary::{summarize, EconomicSummary, Group, SummaryLine, SummaryRow};

use crate::addr::Address;
use crate::labels::{Category, LabelStore};
use crate::ledger::TxGraph;
use crate::valuation::{ValuationError, Valuer};

#[derive(Debug, Error)]
pub enum EconError {
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Sum of `a`'s credits, each valued at its own day's close and rounded to
/// cents. Addresses absent from the graph received nothing.
pub fn received_usd(a: &Address, g: &TxGraph, valuer: &Valuer) -> Result<Decimal, ValuationError> {
    g.funding_txs(a)
        .map(|tx| valuer.usd_value(tx.value_to(a), tx.timestamp))
        .sum()
}

/// One category per labelled address so that report rows never share an
/// address. Ransom wins over expense labels; an address carrying both
/// salary and reimbursement labels counts as reimbursement/salary.
pub fn primary_categories(labels: &LabelStore) -> BTreeMap<&Address, Category> {
    let mut cats: BTreeMap<&Address, BTreeSet<Category>> = BTreeMap::new();
    for r in labels.records() {
        cats.entry(&r.address).or_default().insert(r.category);
    }
    cats.into_iter()
        .map(|(a, set)| {
            let has = |c| set.contains(&c);
            let primary = if has(Category::RansomPayment) {
                Category::RansomPayment
            } else if has(Category::ReimbursementSalary)
                || (has(Category::Salary) && has(Category::Reimbursement))
            {
                Category::ReimbursementSalary
            } else {
                *set.iter().next().expect("non-empty category set")
            };
            (a, primary)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::ScriptKind;
    use crate::labels::{LabelRecord, LabelSource};

    fn addr(n: u8) -> Address {
        Address::from_payload(ScriptKind::P2PKH, &[n; 20]).unwrap()
    }

    fn label(n: u8, category: Category) -> LabelRecord {
        LabelRecord {
            address: addr(n),
            category,
            source: LabelSource::LeakAnnotation,
            owner_alias: None,
            note: String::new(),
        }
    }

    #[test]
    fn category_precedence() {
        let store = LabelStore::from_records([
            label(1, Category::Salary),
            label(1, Category::Reimbursement),
            label(2, Category::Salary),
            label(2, Category::RansomPayment),
            label(3, Category::Reimbursement),
            label(4, Category::ClaimedOwnership),
            label(4, Category::Salary),
        ]);
        let p = primary_categories(&store);
        assert_eq!(p[&addr(1)], Category::ReimbursementSalary);
        assert_eq!(p[&addr(2)], Category::RansomPayment);
        assert_eq!(p[&addr(3)], Category::Reimbursement);
        assert_eq!(p[&addr(4)], Category::Salary);
    }
}

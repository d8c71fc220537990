use std::collections::BTreeSet;
use std::fmt;

use rust_decimal::Decimal;

use super::{primary_categories, received_usd, EconError};
use crate::addr::Address;
use crate::heuristics::{Strain, VerdictRow};
use crate::labels::{Category, LabelSource, LabelStore};
use crate::ledger::TxGraph;
use crate::valuation::Valuer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Income,
    Expense,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Income => "income",
            Group::Expense => "expense",
        })
    }
}

/// Fixed rows of the income/expense table, in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SummaryLine {
    LeakRansom,
    CrowdsourcedRansom,
    LikelyConti,
    LikelyRyuk,
    Salary,
    ReimbursementSalary,
    Reimbursement,
}

impl SummaryLine {
    pub const ALL: [SummaryLine; 7] = [
        SummaryLine::LeakRansom,
        SummaryLine::CrowdsourcedRansom,
        SummaryLine::LikelyConti,
        SummaryLine::LikelyRyuk,
        SummaryLine::Salary,
        SummaryLine::ReimbursementSalary,
        SummaryLine::Reimbursement,
    ];

    pub fn group(&self) -> Group {
        match self {
            SummaryLine::LeakRansom
            | SummaryLine::CrowdsourcedRansom
            | SummaryLine::LikelyConti
            | SummaryLine::LikelyRyuk => Group::Income,
            _ => Group::Expense,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SummaryLine::LeakRansom => "Ransom payments (leak)",
            SummaryLine::CrowdsourcedRansom => "Ransom payments (crowdsourced)",
            SummaryLine::LikelyConti => "Likely Conti payments",
            SummaryLine::LikelyRyuk => "Likely Ryuk payments",
            SummaryLine::Salary => "Salary",
            SummaryLine::ReimbursementSalary => "Reimbursement/Salary",
            SummaryLine::Reimbursement => "Reimbursement",
        }
    }
}

impl fmt::Display for SummaryLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryRow {
    pub line: SummaryLine,
    pub usd: Decimal,
    pub address_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EconomicSummary {
    /// All seven rows in [`SummaryLine::ALL`] order, zero rows included.
    pub rows: Vec<SummaryRow>,
    /// Addresses labelled ransom by both the leak and the crowdsourced set;
    /// counted once, under the leak row.
    pub ransom_overlap: usize,
    /// Positive verdicts on addresses that were already confirmed ransom.
    pub likely_already_confirmed: usize,
}

impl EconomicSummary {
    pub fn row(&self, line: SummaryLine) -> &SummaryRow {
        self.rows.iter().find(|r| r.line == line).expect("every line present")
    }

    pub fn group_rows(&self, g: Group) -> impl Iterator<Item = &SummaryRow> {
        self.rows.iter().filter(move |r| r.line.group() == g)
    }

    pub fn total_usd(&self, g: Group) -> Decimal {
        self.group_rows(g).map(|r| r.usd).sum()
    }

    pub fn total_addresses(&self, g: Group) -> usize {
        self.group_rows(g).map(|r| r.address_count).sum()
    }
}

/// Builds the income/expense table. Each address lands in at most one row;
/// credits are valued at their own day's close and rounded per credit.
pub fn summarize(
    labels: &LabelStore,
    verdicts: &[VerdictRow],
    g: &TxGraph,
    valuer: &Valuer,
) -> Result<EconomicSummary, EconError> {
    let ransom_from = |want: fn(&LabelSource) -> bool| -> BTreeSet<&Address> {
        labels
            .records()
            .iter()
            .filter(|r| r.category == Category::RansomPayment && want(&r.source))
            .map(|r| &r.address)
            .collect()
    };
    let leak = ransom_from(|s| matches!(s, LabelSource::LeakAnnotation));
    let crowd_all = ransom_from(|s| matches!(s, LabelSource::CrowdsourcedDataset));
    let ransom_overlap = crowd_all.intersection(&leak).count();
    let crowd: BTreeSet<&Address> = crowd_all.difference(&leak).copied().collect();

    let mut conti = BTreeSet::new();
    let mut ryuk = BTreeSet::new();
    let mut confirmed_positive = BTreeSet::new();
    for v in verdicts.iter().filter(|v| v.is_positive()) {
        if leak.contains(&v.address) || crowd.contains(&v.address) {
            confirmed_positive.insert(&v.address);
            continue;
        }
        match v.strain {
            Some(Strain::Conti) => conti.insert(&v.address),
            Some(Strain::Ryuk) => ryuk.insert(&v.address),
            None => false,
        };
    }
    let likely_already_confirmed = confirmed_positive.len();

    let primary = primary_categories(labels);
    let expense = |c: Category| -> BTreeSet<&Address> {
        primary.iter().filter(|(_, pc)| **pc == c).map(|(a, _)| *a).collect()
    };

    let mut rows = Vec::with_capacity(SummaryLine::ALL.len());
    for line in SummaryLine::ALL {
        let set = match line {
            SummaryLine::LeakRansom => leak.clone(),
            SummaryLine::CrowdsourcedRansom => crowd.clone(),
            SummaryLine::LikelyConti => conti.clone(),
            SummaryLine::LikelyRyuk => ryuk.clone(),
            SummaryLine::Salary => expense(Category::Salary),
            SummaryLine::ReimbursementSalary => expense(Category::ReimbursementSalary),
            SummaryLine::Reimbursement => expense(Category::Reimbursement),
        };
        let mut usd = Decimal::ZERO;
        for a in &set {
            usd += received_usd(a, g, valuer)?;
        }
        rows.push(SummaryRow {
            line,
            usd,
            address_count: set.len(),
        });
    }
    Ok(EconomicSummary {
        rows,
        ransom_overlap,
        likely_already_confirmed,
    })
}

use std::collections::BTreeMap;

use super::ChatError;

/// Items × categories rating counts; every row sums to the rater count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementMatrix {
    counts: Vec<Vec<u64>>,
    raters: u64,
}

impl AgreementMatrix {
    pub fn new(counts: Vec<Vec<u64>>, raters: u64) -> Result<Self, ChatError> {
        if raters < 2 {
            return Err(ChatError::TooFewRaters(raters as usize));
        }
        if counts.is_empty() {
            return Err(ChatError::EmptyMatrix);
        }
        for (item, row) in counts.iter().enumerate() {
            let got: u64 = row.iter().sum();
            if got != raters {
                return Err(ChatError::RowSum {
                    item,
                    got,
                    expected: raters,
                });
            }
        }
        Ok(AgreementMatrix { counts, raters })
    }

    /// Builds a matrix from per-item label lists (one label per rater).
    /// Category columns are the sorted union of observed labels.
    pub fn from_labels<S: AsRef<str>>(items: &[Vec<S>]) -> Result<Self, ChatError> {
        let raters = items.first().map_or(0, Vec::len) as u64;
        let mut columns: BTreeMap<&str, usize> = BTreeMap::new();
        for item in items {
            for l in item {
                columns.entry(l.as_ref()).or_insert(0);
            }
        }
        for (i, v) in columns.values_mut().enumerate() {
            *v = i;
        }
        let counts = items
            .iter()
            .map(|item| {
                let mut row = vec![0u64; columns.len()];
                for l in item {
                    row[columns[l.as_ref()]] += 1;
                }
                row
            })
            .collect();
        AgreementMatrix::new(counts, raters)
    }

    pub fn raters(&self) -> u64 {
        self.raters
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// Fleiss' kappa, `(P̄ − P̄e) / (1 − P̄e)`.
pub fn fleiss_kappa(m: &AgreementMatrix) -> Result<f64, ChatError> {
    let n = m.raters as f64;
    let items = m.counts.len() as f64;
    let width = m.counts.iter().map(Vec::len).max().unwrap_or(0);

    let mut column_totals = vec![0u64; width];
    let mut agreement_sum = 0.0;
    for row in &m.counts {
        let squares: u64 = row.iter().map(|&c| c * c).sum();
        agreement_sum += (squares - m.raters) as f64 / (n * (n - 1.0));
        for (j, &c) in row.iter().enumerate() {
            column_totals[j] += c;
        }
    }
    let p_bar = agreement_sum / items;
    let total = items * n;
    let p_e: f64 = column_totals
        .iter()
        .map(|&t| {
            let p = t as f64 / total;
            p * p
        })
        .sum();

    if column_totals.iter().filter(|&&t| t > 0).count() <= 1 {
        // Every rating fell in one category: expected agreement is exactly 1.
        return if p_bar == 1.0 {
            Ok(1.0)
        } else {
            Err(ChatError::DegenerateAgreement { observed: p_bar })
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

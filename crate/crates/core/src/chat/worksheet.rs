use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgreementMatrix, ChatError};
use crate::addr::{validate, CandidateAddress};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorksheetRow {
    pub candidate_id: String,
    pub address: String,
    pub context: String,
    pub category: String,
}

/// An annotation worksheet; one file per rater once filled in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Worksheet {
    pub rows: Vec<WorksheetRow>,
}

fn render_context(c: &CandidateAddress) -> String {
    c.context
        .iter()
        .map(|m| {
            format!(
                "[{}] {} -> {}: {}",
                m.ts.format("%Y-%m-%dT%H:%M:%SZ"),
                m.from_alias,
                m.to_alias,
                m.body
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Draws `n` candidates without replacement using a seeded ChaCha stream.
pub fn sample_for_annotation(
    candidates: &[CandidateAddress],
    n: usize,
    seed: u64,
) -> Result<Worksheet, ChatError> {
    if n > candidates.len() {
        return Err(ChatError::SampleTooLarge {
            requested: n,
            available: candidates.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.shuffle(&mut rng);
    let rows = order[..n]
        .iter()
        .map(|&i| {
            let c = &candidates[i];
            WorksheetRow {
                candidate_id: c.id(),
                address: validate(&c.raw_text)
                    .map(|a| a.to_string())
                    .unwrap_or_else(|_| c.raw_text.clone()),
                context: render_context(c),
                category: String::new(),
            }
        })
        .collect();
    Ok(Worksheet { rows })
}

impl Worksheet {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ChatError> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, ChatError> {
        let mut rdr = csv::Reader::from_reader(r);
        let rows = rdr.deserialize().collect::<Result<Vec<WorksheetRow>, _>>()?;
        Ok(Worksheet { rows })
    }

    /// Joins completed worksheets (one per rater) on candidate id. Every item
    /// must carry a category in every worksheet.
    pub fn agreement(sheets: &[Worksheet]) -> Result<AgreementMatrix, ChatError> {
        let mut items: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for sheet in sheets {
            for row in &sheet.rows {
                items
                    .entry(row.candidate_id.as_str())
                    .or_default()
                    .push(row.category.trim());
            }
        }
        let mut labels = Vec::with_capacity(items.len());
        for (id, cats) in items {
            if cats.len() != sheets.len() || cats.iter().any(|c| c.is_empty()) {
                return Err(ChatError::UnmatchedItem(id.to_string()));
            }
            labels.push(cats);
        }
        AgreementMatrix::from_labels(&labels)
    }
}

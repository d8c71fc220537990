use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::addr::Address;
use crate::heuristics::Strain;

/// The three tests a likely ransom address must pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ReachesLeak,
    SplitOk,
    SourceOk,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::ReachesLeak => "reaches_leak",
            Criterion::SplitOk => "split_ok",
            Criterion::SourceOk => "source_ok",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    Positive,
    WrongPercent,
    NoLeak,
    DirtyFunding,
    Noise,
}

impl PlantKind {
    /// The single criterion a near miss is built to fail.
    pub fn violated(&self) -> Option<Criterion> {
        match self {
            PlantKind::WrongPercent => Some(Criterion::SplitOk),
            PlantKind::NoLeak => Some(Criterion::ReachesLeak),
            PlantKind::DirtyFunding => Some(Criterion::SourceOk),
            PlantKind::Positive | PlantKind::Noise => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCandidate {
    pub address: Address,
    pub kind: PlantKind,
    /// Grid percent used to build the split, where one was built.
    pub percent: Option<u8>,
    /// Set on positives only.
    pub strain: Option<Strain>,
    pub first_seen: DateTime<Utc>,
    pub received_sats: u64,
    /// Share of received value per funding entity; `unknown` for unlabelled senders.
    pub funding: BTreeMap<String, f64>,
}

/// Reference USD amounts in integer cents, per income/expense row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerCents {
    pub leak_ransom: u64,
    pub crowdsourced_ransom: u64,
    pub likely_conti: u64,
    pub likely_ryuk: u64,
    pub salary: u64,
    pub reimbursement_salary: u64,
    pub reimbursement: u64,
    pub ransom_overlap: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTruth {
    /// Distinct valid addresses written into the chat, sorted.
    pub planted_addresses: Vec<Address>,
    pub mentions: usize,
    pub decoys: usize,
    pub hub_alias: Option<String>,
    pub hub_degree: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub seed: u64,
    pub era_cutoff: DateTime<Utc>,
    /// Sorted by address.
    pub candidates: Vec<PlantedCandidate>,
    /// Multi-member co-spend groups; members and groups sorted.
    pub cospend_clusters: Vec<Vec<Address>>,
    pub alias_payroll_cents: BTreeMap<String, u64>,
    pub ledger_cents: LedgerCents,
    pub chat: ChatTruth,
}

impl GroundTruthManifest {
    pub fn positives(&self) -> impl Iterator<Item = &PlantedCandidate> {
        self.candidates.iter().filter(|c| c.kind == PlantKind::Positive)
    }

    pub fn candidate(&self, a: &Address) -> Option<&PlantedCandidate> {
        self.candidates
            .binary_search_by(|c| c.address.cmp(a))
            .ok()
            .map(|i| &self.candidates[i])
    }

    /// Count of positives per planted percent.
    pub fn percent_histogram(&self) -> BTreeMap<u8, usize> {
        let mut h = BTreeMap::new();
        for c in self.positives() {
            if let Some(p) = c.percent {
                *h.entry(p).or_default() += 1;
            }
        }
        h
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), SynthError> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self, SynthError> {
        Ok(serde_json::from_reader(r)?)
    }
}

/// `sats × rate_cents / 1e8` in whole cents, ties to even, in integers only.
pub fn usd_cents(sats: u64, rate_cents: u64) -> u64 {
    let n = sats as u128 * rate_cents as u128;
    let d = 100_000_000u128;
    let (q, r) = (n / d, n % d);
    let up = match (2 * r).cmp(&d) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => q % 2 == 1,
        std::cmp::Ordering::Less => false,
    };
    (q + up as u128) as u64
}

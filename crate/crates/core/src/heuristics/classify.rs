use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::{
    detect_split, leak_path, source_attribution, AttributionMode, HeuristicError, LeakHit,
    SplitEvent,
};
use crate::addr::Address;
use crate::labels::EntityResolver;
use crate::ledger::TxGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strain {
    Ryuk,
    Conti,
}

impl fmt::Display for Strain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strain::Ryuk => "ryuk",
            Strain::Conti => "conti",
        })
    }
}

impl FromStr for Strain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ryuk" => Ok(Strain::Ryuk),
            "conti" => Ok(Strain::Conti),
            other => Err(other.to_string()),
        }
    }
}

/// First-use instant separating Ryuk from Conti payments.
pub fn default_era_cutoff() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 3, 1, 0, 0, 0).single().expect("valid cutoff")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Allowed distance from a multiple of 5%, in percentage points.
    pub tol_pp: f64,
    pub max_hops: u32,
    /// Clean-funding share that must be strictly exceeded.
    pub source_threshold: f64,
    pub era_cutoff: DateTime<Utc>,
    pub attribution: AttributionMode,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            tol_pp: 0.5,
            max_hops: 8,
            source_threshold: 0.99,
            era_cutoff: default_era_cutoff(),
            attribution: AttributionMode::OneHop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansomVerdict {
    pub address: Address,
    pub reaches_leak: bool,
    pub split_ok: bool,
    pub source_ok: bool,
    /// Set only on positive verdicts.
    pub strain: Option<Strain>,
    pub split: Option<SplitEvent>,
    pub leak_hit: Option<LeakHit>,
    pub clean_fraction: f64,
    pub notes: Vec<String>,
}

impl RansomVerdict {
    pub fn is_positive(&self) -> bool {
        self.reaches_leak && self.split_ok && self.source_ok
    }

    pub fn evidence_txids(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        if let Some(s) = &self.split {
            v.push(s.spend_txid.to_string());
        }
        if let Some(h) = &self.leak_hit {
            for t in &h.path {
                let t = t.to_string();
                if !v.contains(&t) {
                    v.push(t);
                }
            }
        }
        v
    }

    pub fn to_row(&self) -> VerdictRow {
        VerdictRow {
            address: self.address.clone(),
            verdict: if self.is_positive() { "positive" } else { "negative" }.into(),
            percent: self.split.as_ref().map(|s| s.matched_percent),
            strain: self.strain,
            residual: self.split.as_ref().map(|s| format!("{:.6}", s.residual_pp)),
            evidence_txids: self.evidence_txids().join(";"),
            reaches_leak: self.reaches_leak,
            split_ok: self.split_ok,
            source_ok: self.source_ok,
            clean_fraction: format!("{:.6}", self.clean_fraction),
        }
    }
}

/// Applies all three criteria to one address.
pub fn classify_ransom(
    a: &Address,
    leak: &HashSet<Address>,
    g: &TxGraph,
    entities: &EntityResolver,
    params: &DetectorParams,
) -> Result<RansomVerdict, HeuristicError> {
    let first_seen = g
        .first_seen(a)
        .ok_or_else(|| HeuristicError::UnknownAddress(a.clone()))?;
    let mut notes = Vec::new();

    let leak_hit = leak_path(a, leak, g, params.max_hops, entities)?;
    let split = detect_split(a, g, params.tol_pp)?;
    let clean_fraction = match source_attribution(a, g, entities, params.attribution) {
        Ok(at) => at.clean_fraction(),
        Err(HeuristicError::NothingReceived(_)) => {
            notes.push("no received value".to_string());
            0.0
        }
        Err(e) => return Err(e),
    };

    let mut v = RansomVerdict {
        address: a.clone(),
        reaches_leak: leak_hit.is_some(),
        split_ok: split.is_some(),
        source_ok: clean_fraction > params.source_threshold,
        strain: None,
        split,
        leak_hit,
        clean_fraction,
        notes,
    };
    if v.is_positive() {
        v.strain = Some(if first_seen < params.era_cutoff {
            Strain::Ryuk
        } else {
            Strain::Conti
        });
    }
    Ok(v)
}

/// Classifies each address in order.
pub fn classify_all<'a>(
    candidates: impl IntoIterator<Item = &'a Address>,
    leak: &HashSet<Address>,
    g: &TxGraph,
    entities: &EntityResolver,
    params: &DetectorParams,
) -> Result<Vec<RansomVerdict>, HeuristicError> {
    candidates
        .into_iter()
        .map(|a| classify_ransom(a, leak, g, entities, params))
        .collect()
}

/// One line of the verdict file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub address: Address,
    pub verdict: String,
    pub percent: Option<u8>,
    pub strain: Option<Strain>,
    pub residual: Option<String>,
    pub evidence_txids: String,
    pub reaches_leak: bool,
    pub split_ok: bool,
    pub source_ok: bool,
    pub clean_fraction: String,
}

impl VerdictRow {
    pub fn is_positive(&self) -> bool {
        self.verdict == "positive"
    }
}

pub fn write_verdicts<W: Write>(w: W, rows: &[VerdictRow]) -> Result<(), HeuristicError> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    if rows.is_empty() {
        wtr.write_record([
            "address",
            "verdict",
            "percent",
            "strain",
            "residual",
            "evidence_txids",
            "reaches_leak",
            "split_ok",
            "source_ok",
            "clean_fraction",
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_verdicts<R: Read>(r: R) -> Result<Vec<VerdictRow>, HeuristicError> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows = rdr.deserialize().collect::<Result<Vec<VerdictRow>, _>>()?;
    for row in &rows {
        if row.verdict != "positive" && row.verdict != "negative" {
            return Err(HeuristicError::BadVerdict(row.verdict.clone()));
        }
    }
    Ok(rows)
}

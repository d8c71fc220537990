use std::collections::{BTreeMap, BTreeSet};

use super::manifest::{Criterion, GroundTruthManifest, PlantKind};
use super::SynthError;
use crate::addr::Address;
use crate::heuristics::VerdictRow;

/// Detector output compared with a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// One when nothing was flagged.
    pub precision: f64,
    /// One when nothing was planted.
    pub recall: f64,
    /// For each missed positive, every criterion its verdict failed.
    pub fn_by_criterion: BTreeMap<Criterion, usize>,
    /// Manifest candidates absent from the verdicts; scored as negatives.
    pub missing_verdicts: usize,
    pub missed: Vec<Address>,
    pub spurious: Vec<Address>,
    /// Detected positives whose strain differs from the planted one.
    pub strain_errors: Vec<Address>,
    /// Detected positives whose percent differs from the planted one.
    pub percent_errors: Vec<Address>,
    /// Near misses whose verdict did not fail the criterion they were built to fail.
    pub near_miss_escapes: Vec<Address>,
}

fn flag(v: &VerdictRow, c: Criterion) -> bool {
    match c {
        Criterion::ReachesLeak => v.reaches_leak,
        Criterion::SplitOk => v.split_ok,
        Criterion::SourceOk => v.source_ok,
    }
}

/// Scores verdicts against the planted truth. Verdicts for addresses the
/// manifest does not know, or repeated verdicts, are a `ManifestMismatch`.
pub fn score(verdicts: &[VerdictRow], manifest: &GroundTruthManifest) -> Result<ScoreReport, SynthError> {
    let mut by_addr: BTreeMap<&Address, &VerdictRow> = BTreeMap::new();
    for v in verdicts {
        if manifest.candidate(&v.address).is_none() {
            return Err(SynthError::ManifestMismatch(format!("{} is not a planted candidate", v.address)));
        }
        if by_addr.insert(&v.address, v).is_some() {
            return Err(SynthError::ManifestMismatch(format!("{} has more than one verdict", v.address)));
        }
    }
    let mut r = ScoreReport {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
        precision: 1.0,
        recall: 1.0,
        fn_by_criterion: BTreeMap::new(),
        missing_verdicts: 0,
        missed: Vec::new(),
        spurious: Vec::new(),
        strain_errors: Vec::new(),
        percent_errors: Vec::new(),
        near_miss_escapes: Vec::new(),
    };
    let criteria = [Criterion::ReachesLeak, Criterion::SplitOk, Criterion::SourceOk];
    for c in &manifest.candidates {
        let v = by_addr.get(&c.address).copied();
        if v.is_none() {
            r.missing_verdicts += 1;
        }
        let flagged = v.is_some_and(VerdictRow::is_positive);
        let planted = c.kind == PlantKind::Positive;
        match (planted, flagged) {
            (true, true) => {
                r.true_positives += 1;
                let v = v.expect("flagged implies verdict");
                if v.strain != c.strain {
                    r.strain_errors.push(c.address.clone());
                }
                if v.percent != c.percent {
                    r.percent_errors.push(c.address.clone());
                }
            }
            (true, false) => {
                r.false_negatives += 1;
                r.missed.push(c.address.clone());
                if let Some(v) = v {
                    for k in criteria {
                        if !flag(v, k) {
                            *r.fn_by_criterion.entry(k).or_default() += 1;
                        }
                    }
                }
            }
            (false, true) => {
                r.false_positives += 1;
                r.spurious.push(c.address.clone());
            }
            (false, false) => r.true_negatives += 1,
        }
        if let (Some(k), Some(v)) = (c.kind.violated(), v) {
            if flag(v, k) {
                r.near_miss_escapes.push(c.address.clone());
            }
        }
    }
    let flagged = r.true_positives + r.false_positives;
    if flagged > 0 {
        r.precision = r.true_positives as f64 / flagged as f64;
    }
    let planted = r.true_positives + r.false_negatives;
    if planted > 0 {
        r.recall = r.true_positives as f64 / planted as f64;
    }
    Ok(r)
}

impl ScoreReport {
    /// Criteria that explain at least one missed positive, most frequent first.
    pub fn failing_criteria(&self) -> Vec<Criterion> {
        let mut v: Vec<(Criterion, usize)> = self.fn_by_criterion.iter().map(|(k, n)| (*k, *n)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.into_iter().map(|(k, _)| k).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let list = |xs: &[Address]| xs.iter().map(|a| a.to_string()).collect::<BTreeSet<_>>();
        serde_json::json!({
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "fn_by_criterion": self.fn_by_criterion.iter().map(|(k, n)| (k.to_string(), *n)).collect::<BTreeMap<_, _>>(),
            "missing_verdicts": self.missing_verdicts,
            "missed": list(&self.missed),
            "spurious": list(&self.spurious),
            "strain_errors": list(&self.strain_errors),
            "percent_errors": list(&self.percent_errors),
            "near_miss_escapes": list(&self.near_miss_escapes),
        })
    }
}

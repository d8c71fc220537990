//! Generate a seeded scenario, write it to a temp directory, run the detector
//! and score it against the planted ground truth.

use std::collections::HashSet;

use ransomtrace::heuristics::{classify_all, cospend_clusters, DetectorParams, RansomVerdict};
use ransomtrace::labels::EntityResolver;
use ransomtrace::synth::{generate, score, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default();
    let s = generate(&cfg)?;
    let dir = std::env::temp_dir().join(format!("ransomtrace-scenario-{}", cfg.seed));
    let files = s.write_to(&dir)?;
    println!("wrote {} files to {}", files.len(), dir.display());

    let g = s.graph();
    let resolver = EntityResolver::new(&s.entities, Some(cospend_clusters(&g)));
    let leak: HashSet<_> = s.leak.iter().cloned().collect();
    for tol_pp in [0.5, 0.0] {
        let params = DetectorParams { tol_pp, ..DetectorParams::default() };
        let rows: Vec<_> = classify_all(&s.candidates, &leak, &g, &resolver, &params)?
            .iter()
            .map(RansomVerdict::to_row)
            .collect();
        let r = score(&rows, &s.manifest)?;
        println!(
            "tol {tol_pp} pp: precision {:.3} recall {:.3} (tp {} fp {} fn {}) misses by criterion {:?}",
            r.precision, r.recall, r.true_positives, r.false_positives, r.false_negatives, r.fn_by_criterion
        );
    }
    Ok(())
}

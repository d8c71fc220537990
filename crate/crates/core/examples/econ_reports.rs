//! Income/expense summary, funding origins, alias earnings and fund flows over
//! a small synthetic economy, rendered as CSV and Mermaid text.

use std::collections::HashSet;

use ransomtrace::econ::{alias_earnings, flow_report, origin_table, summarize, Format, Group, Report};
use ransomtrace::heuristics::{classify_all, cospend_clusters, DetectorParams, RansomVerdict};
use ransomtrace::labels::EntityResolver;
use ransomtrace::synth::{generate, ScenarioConfig};
use ransomtrace::valuation::{GapPolicy, Valuer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig {
        seed: 3,
        victims: 25,
        noise_addresses: 25,
        ..ScenarioConfig::default()
    };
    let s = generate(&cfg)?;
    let g = s.graph();
    let resolver = EntityResolver::new(&s.entities, Some(cospend_clusters(&g)));
    let leak: HashSet<_> = s.leak.iter().cloned().collect();
    let verdicts: Vec<_> = classify_all(&s.candidates, &leak, &g, &resolver, &DetectorParams::default())?
        .iter()
        .map(RansomVerdict::to_row)
        .collect();
    let valuer = Valuer::new(&s.rates, GapPolicy::Strict);

    let summary = summarize(&s.labels, &verdicts, &g, &valuer)?;
    println!("income ${} / expenses ${}\n", summary.total_usd(Group::Income), summary.total_usd(Group::Expense));
    let mut out = std::io::stdout().lock();
    Report::Summary(&summary).write(&mut out, Format::Csv)?;
    println!();
    let origins = origin_table(&verdicts, &s.labels, &g, &resolver, &valuer)?;
    Report::Origins(&origins).write(&mut out, Format::GraphText)?;
    println!();
    let aliases = alias_earnings(&s.labels, &g, &valuer)?;
    Report::Aliases(&aliases).write(&mut out, Format::Csv)?;
    println!();
    let flows = flow_report(&s.labels, &g, &resolver, &valuer)?;
    Report::Flows(&flows).write(&mut out, Format::GraphText)?;
    Ok(())
}

//! Degree centrality, an annotation worksheet and Fleiss' kappa over a
//! synthetic chat corpus.

use ransomtrace::addr::extract_candidates;
use ransomtrace::chat::{degree_centrality, fleiss_kappa, sample_for_annotation, AgreementMatrix};
use ransomtrace::synth::{generate, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = generate(&ScenarioConfig { seed: 11, ..ScenarioConfig::default() })?;
    for (server, ranking) in degree_centrality(&s.chat) {
        let top: Vec<String> = ranking.iter().take(5).map(|d| format!("{} ({})", d.alias, d.degree)).collect();
        println!("{server}: {}", top.join(", "));
    }

    let candidates = extract_candidates(&s.chat);
    let sheet = sample_for_annotation(&candidates, 5.min(candidates.len()), 42)?;
    println!();
    sheet.write_csv(std::io::stdout())?;

    // Three annotators labelling five items.
    let labels = vec![
        vec!["salary", "salary", "salary"],
        vec!["ransom", "ransom", "ransom"],
        vec!["salary", "salary", "services"],
        vec!["services", "ransom", "ransom"],
        vec!["salary", "salary", "salary"],
    ];
    let m = AgreementMatrix::from_labels(&labels)?;
    println!("\nkappa over {} items, {} raters: {:.4}", m.items(), m.raters(), fleiss_kappa(&m)?);
    Ok(())
}

use std::collections::HashSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::args::{ChatCommand, Command, DetectArgs, FormatArg, GapArg, ReportArgs, ReportKind, SynthCommand};
use super::{CliError, Context};
use crate::addr::{candidate_report, dedupe, extract_candidates, split_valid, validate, Address, MentionCounts};
use crate::chat::{degree_centrality, fleiss_kappa, sample_for_annotation, Corpus, Worksheet};
use crate::econ::{self, Format, Report};
use crate::heuristics::{
    classify_all, cospend_clusters, read_verdicts, write_verdicts, AttributionMode, DetectorParams, Strain,
    VerdictRow,
};
use crate::labels::{Category, EntityResolver, EntityStore, LabelStore};
use crate::ledger::{load_graph, write_transactions, FetchClient, FetchConfig, TxGraph};
use crate::synth::{self, GroundTruthManifest, ScenarioConfig};
use crate::valuation::{GapPolicy, RateTable, Valuer};

pub(super) fn dispatch(cmd: &Command, ctx: &mut Context) -> Result<Value, CliError> {
    match cmd {
        Command::Extract { chat } => extract(ctx, chat),
        Command::Validate { addresses, file } => validate_cmd(ctx, addresses, file.as_deref()),
        Command::Ingest { txs } => ingest(ctx, txs),
        Command::Fetch {
            addr_file,
            cache,
            endpoint,
            rate,
            page_size,
        } => fetch(ctx, addr_file, cache, endpoint, *rate, *page_size),
        Command::Detect(a) => detect(ctx, a),
        Command::Cluster { txs } => cluster(ctx, txs),
        Command::Report(a) => report(ctx, a),
        Command::Chat(c) => chat(ctx, c),
        Command::Synth(s) => synth_cmd(ctx, s),
    }
}

fn graph(ctx: &mut Context, paths: &[PathBuf]) -> Result<TxGraph, CliError> {
    let paths = ctx.inputs(paths)?;
    Ok(load_graph(&paths)?)
}

/// One address per line; blank lines and `#` comments are skipped.
fn address_list(ctx: &mut Context, path: &Path) -> Result<Vec<Address>, CliError> {
    let r = ctx.open(path)?;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let s = line.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let a = validate(s)
            .map_err(|e| CliError::Data(format!("{}:{}: {s:?}: {e}", path.display(), i + 1)))?;
        out.push(a);
    }
    Ok(out)
}

fn resolver(ctx: &mut Context, path: &Path, g: &TxGraph) -> Result<EntityResolver, CliError> {
    let store = EntityStore::load(ctx.open(path)?)?;
    Ok(EntityResolver::new(&store, Some(cospend_clusters(g))))
}

fn corpus(ctx: &mut Context, paths: &[PathBuf]) -> Result<Corpus, CliError> {
    let paths = ctx.inputs(paths)?;
    Ok(Corpus::load_files(&paths)?)
}

fn csv_bytes<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn extract(ctx: &mut Context, chat: &[PathBuf]) -> Result<Value, CliError> {
    let corpus = corpus(ctx, chat)?;
    let candidates = extract_candidates(corpus.messages());
    let total = candidates.len();
    let (ok, bad) = split_valid(candidates);
    let groups = dedupe(ok);
    let counts = MentionCounts::of(&groups);
    let report = csv_bytes(|b| candidate_report(b, &groups).map_err(|e| CliError::Internal(e.to_string())))?;
    ctx.write("candidates.csv", &report)?;
    let mut list = String::new();
    for a in groups.keys() {
        list.push_str(a.as_str());
        list.push('\n');
    }
    ctx.write("addresses.txt", list.as_bytes())?;
    let rejected = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        let internal = |e: csv::Error| CliError::Internal(e.to_string());
        w.write_record(["raw_text", "message_id", "start", "end", "rule"]).map_err(internal)?;
        for (c, f) in &bad {
            w.write_record([
                c.raw_text.as_str(),
                &c.span.message_id.to_string(),
                &c.span.start.to_string(),
                &c.span.end.to_string(),
                f.rule(),
            ])
            .map_err(internal)?;
        }
        w.flush().map_err(|e| CliError::Internal(e.to_string()))
    })?;
    ctx.write("rejected.csv", &rejected)?;
    Ok(json!({
        "messages": corpus.len(),
        "candidates": total,
        "rejected": bad.len(),
        "unique_addresses": counts.unique_addresses,
        "mentions": counts.mentions,
    }))
}

fn validate_cmd(ctx: &mut Context, addresses: &[String], file: Option<&Path>) -> Result<Value, CliError> {
    let mut inputs: Vec<String> = addresses.to_vec();
    if let Some(p) = file {
        let r = ctx.open(p)?;
        for line in r.lines() {
            let line = line.map_err(|e| CliError::Data(e.to_string()))?;
            if !line.trim().is_empty() {
                inputs.push(line.trim().to_string());
            }
        }
    }
    if inputs.is_empty() {
        return Err(CliError::Usage("no addresses given (pass them as arguments or with --file)".into()));
    }
    let mut valid = 0;
    let bytes = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        let internal = |e: csv::Error| CliError::Internal(e.to_string());
        w.write_record(["input", "valid", "encoding", "script_kind", "canonical", "failure"])
            .map_err(internal)?;
        for s in &inputs {
            let rec = match validate(s) {
                Ok(a) => {
                    valid += 1;
                    [s.clone(), "true".into(), format!("{:?}", a.encoding()), a.script_kind().to_string(), a.to_string(), String::new()]
                }
                Err(e) => [s.clone(), "false".into(), String::new(), String::new(), String::new(), e.rule().to_string()],
            };
            w.write_record(&rec).map_err(internal)?;
        }
        w.flush().map_err(|e| CliError::Internal(e.to_string()))
    })?;
    ctx.write("validation.csv", &bytes)?;
    Ok(json!({ "checked": inputs.len(), "valid": valid, "invalid": inputs.len() - valid }))
}

fn ingest(ctx: &mut Context, txs: &[PathBuf]) -> Result<Value, CliError> {
    let g = graph(ctx, txs)?;
    let bytes = csv_bytes(|b| Ok(write_transactions(b, g.transactions())?))?;
    ctx.write("transactions.jsonl", &bytes)?;
    Ok(json!({ "transactions": g.len(), "addresses": g.address_count() }))
}

fn fetch(
    ctx: &mut Context,
    addr_file: &Path,
    cache: &Path,
    endpoint: &str,
    rate: f64,
    page_size: usize,
) -> Result<Value, CliError> {
    let addrs = address_list(ctx, addr_file)?;
    let mut cfg = FetchConfig::new(endpoint, cache);
    cfg.rate_per_sec = rate;
    cfg.page_size = page_size.max(1);
    let client = FetchClient::new(cfg);
    let mut all = Vec::new();
    for a in &addrs {
        all.extend(client.fetch_address_history(a)?);
        ctx.produced([client.cache_path(a)]);
    }
    let g = TxGraph::ingest(all)?;
    let bytes = csv_bytes(|b| Ok(write_transactions(b, g.transactions())?))?;
    ctx.write("transactions.jsonl", &bytes)?;
    Ok(json!({ "addresses": addrs.len(), "transactions": g.len() }))
}

fn detect(ctx: &mut Context, a: &DetectArgs) -> Result<Value, CliError> {
    if !(a.tol_pp >= 0.0 && a.tol_pp.is_finite()) {
        return Err(CliError::Usage("--tol-pp must be a non-negative number".into()));
    }
    if a.max_hops == 0 {
        return Err(CliError::Usage("--max-hops must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage("--threshold must lie in [0, 1]".into()));
    }
    let g = graph(ctx, &a.txs)?;
    let candidates = address_list(ctx, &a.candidates)?;
    let leak: HashSet<Address> = address_list(ctx, &a.leak_addrs)?.into_iter().collect();
    let entities = resolver(ctx, &a.entities, &g)?;
    let params = DetectorParams {
        tol_pp: a.tol_pp,
        max_hops: a.max_hops,
        source_threshold: a.threshold,
        era_cutoff: a.cutoff,
        attribution: match a.haircut_depth {
            Some(depth) => AttributionMode::Haircut { depth },
            None => AttributionMode::OneHop,
        },
    };
    let verdicts = classify_all(&candidates, &leak, &g, &entities, &params)?;
    let rows: Vec<VerdictRow> = verdicts.iter().map(|v| v.to_row()).collect();
    let bytes = csv_bytes(|b| Ok(write_verdicts(b, &rows)?))?;
    ctx.write("verdicts.csv", &bytes)?;

    let run_id = ctx.run_id()?;
    let mut derived = LabelStore::default();
    for v in verdicts.iter().filter(|v| v.is_positive()) {
        let note = match (&v.split, v.strain) {
            (Some(s), Some(strain)) => format!("split {}% {}", s.matched_percent, strain),
            _ => String::new(),
        };
        derived.append_derived(v.address.clone(), Category::RansomPayment, note, &run_id)?;
    }
    let bytes = csv_bytes(|b| Ok(derived.dump(b)?))?;
    ctx.write("derived_labels.csv", &bytes)?;

    let count = |s: Strain| rows.iter().filter(|r| r.strain == Some(s)).count();
    Ok(json!({
        "run_id": run_id,
        "candidates": rows.len(),
        "positive": rows.iter().filter(|r| r.is_positive()).count(),
        "conti": count(Strain::Conti),
        "ryuk": count(Strain::Ryuk),
    }))
}

fn cluster(ctx: &mut Context, txs: &[PathBuf]) -> Result<Value, CliError> {
    let g = graph(ctx, txs)?;
    let c = cospend_clusters(&g);
    let bytes = csv_bytes(|b| c.write_csv(b).map_err(|e| CliError::Internal(e.to_string())))?;
    ctx.write("clusters.csv", &bytes)?;
    let largest = c.clusters().map(|(_, m)| m.len()).max().unwrap_or(0);
    let multi = c.clusters().filter(|(_, m)| m.len() > 1).count();
    Ok(json!({ "addresses": g.address_count(), "clusters": c.len(), "multi_member": multi, "largest": largest }))
}

fn report(ctx: &mut Context, a: &ReportArgs) -> Result<Value, CliError> {
    let g = graph(ctx, &a.txs)?;
    let rates = RateTable::load(ctx.open(&a.rates)?)?;
    let policy = match a.gap_policy {
        GapArg::Strict => GapPolicy::Strict,
        GapArg::Carry => GapPolicy::Carry,
    };
    let valuer = Valuer::new(&rates, policy);
    let format = match a.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::GraphText => Format::GraphText,
    };
    let labels = match &a.labels {
        Some(p) => LabelStore::load(ctx.open(p)?)?,
        None => LabelStore::default(),
    };
    let verdicts = match &a.verdicts {
        Some(p) => read_verdicts(ctx.open(p)?)?,
        None => Vec::new(),
    };
    let need_entities = |ctx: &mut Context| -> Result<EntityResolver, CliError> {
        match &a.entities {
            Some(p) => resolver(ctx, p, &g),
            None => Err(CliError::Usage(format!("report {} needs --entities", a.kind.name()))),
        }
    };
    let mut buf = Vec::new();
    let summary = match a.kind {
        ReportKind::Summary => {
            let s = econ::summarize(&labels, &verdicts, &g, &valuer)?;
            Report::Summary(&s).write(&mut buf, format)?;
            json!({
                "income_usd": crate::valuation::format_usd(s.total_usd(econ::Group::Income)),
                "expense_usd": crate::valuation::format_usd(s.total_usd(econ::Group::Expense)),
                "income_addresses": s.total_addresses(econ::Group::Income),
                "expense_addresses": s.total_addresses(econ::Group::Expense),
            })
        }
        ReportKind::Origins => {
            let ents = need_entities(ctx)?;
            let rows = econ::origin_table(&verdicts, &labels, &g, &ents, &valuer)?;
            Report::Origins(&rows).write(&mut buf, format)?;
            json!({ "entities": rows.len() })
        }
        ReportKind::Aliases => {
            let m = econ::alias_earnings(&labels, &g, &valuer)?;
            Report::Aliases(&m).write(&mut buf, format)?;
            json!({ "aliases": m.len() })
        }
        ReportKind::Flows => {
            let ents = need_entities(ctx)?;
            let f = econ::flow_report(&labels, &g, &ents, &valuer)?;
            Report::Flows(&f).write(&mut buf, format)?;
            json!({ "edges": f.len() })
        }
    };
    ctx.write(&format!("{}.{}", a.kind.name(), format.extension()), &buf)?;
    Ok(summary)
}

fn chat(ctx: &mut Context, c: &ChatCommand) -> Result<Value, CliError> {
    match c {
        ChatCommand::Rank { chat, top } => {
            let corpus = corpus(ctx, chat)?;
            let ranked = degree_centrality(corpus.messages());
            let bytes = csv_bytes(|b| {
                let mut w = csv::Writer::from_writer(b);
                let internal = |e: csv::Error| CliError::Internal(e.to_string());
                w.write_record(["server", "rank", "alias", "degree"]).map_err(internal)?;
                for (server, list) in &ranked {
                    for (i, d) in list.iter().take(*top).enumerate() {
                        w.write_record([server.to_string(), (i + 1).to_string(), d.alias.clone(), d.degree.to_string()])
                            .map_err(internal)?;
                    }
                }
                w.flush().map_err(|e| CliError::Internal(e.to_string()))
            })?;
            ctx.write("centrality.csv", &bytes)?;
            let leaders: serde_json::Map<String, Value> = ranked
                .iter()
                .filter_map(|(s, l)| l.first().map(|d| (s.to_string(), json!({ "alias": d.alias, "degree": d.degree }))))
                .collect();
            Ok(json!({ "messages": corpus.len(), "top": leaders }))
        }
        ChatCommand::Kappa { worksheets } => {
            let mut sheets = Vec::new();
            for p in worksheets {
                sheets.push(Worksheet::read_csv(ctx.open(p)?)?);
            }
            let m = Worksheet::agreement(&sheets)?;
            let kappa = fleiss_kappa(&m)?;
            let out = json!({
                "items": m.items(),
                "raters": m.raters(),
                "categories": m.rows().first().map_or(0, Vec::len),
                "kappa": kappa,
            });
            ctx.write("kappa.json", format!("{out:#}\n").as_bytes())?;
            Ok(out)
        }
        ChatCommand::Sample { chat, n } => {
            let corpus = corpus(ctx, chat)?;
            let (ok, _) = split_valid(extract_candidates(corpus.messages()));
            let valid: Vec<_> = ok.into_iter().map(|(_, c)| c).collect();
            let seed = ctx.seed.unwrap_or(0);
            let sheet = sample_for_annotation(&valid, *n, seed)?;
            let bytes = csv_bytes(|b| Ok(sheet.write_csv(b)?))?;
            ctx.write("worksheet.csv", &bytes)?;
            Ok(json!({ "available": valid.len(), "sampled": sheet.rows.len(), "seed": seed }))
        }
    }
}

fn synth_cmd(ctx: &mut Context, s: &SynthCommand) -> Result<Value, CliError> {
    match s {
        SynthCommand::Generate { config } => {
            let p = ctx.input(config)?;
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            let mut cfg = ScenarioConfig::from_toml(&text)?;
            if let Some(seed) = ctx.seed {
                cfg.seed = seed;
            }
            let scenario = synth::generate(&cfg)?;
            let files = scenario.write_to(&ctx.out)?;
            ctx.produced(files);
            Ok(json!({
                "seed": cfg.seed,
                "transactions": scenario.transactions.len(),
                "candidates": scenario.candidates.len(),
                "planted_positives": scenario.manifest.positives().count(),
            }))
        }
        SynthCommand::Score { verdicts, manifest } => {
            let rows = read_verdicts(ctx.open(verdicts)?)?;
            let m = GroundTruthManifest::read(ctx.open(manifest)?)?;
            let r = synth::score(&rows, &m)?;
            let out = r.to_json();
            ctx.write("score.json", format!("{out:#}\n").as_bytes())?;
            Ok(json!({
                "precision": r.precision,
                "recall": r.recall,
                "fn_by_criterion": out["fn_by_criterion"],
            }))
        }
    }
}

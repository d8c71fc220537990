use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "ransomtrace", version, about = "Ransomware payment tracing over Bitcoin transaction graphs")]
pub struct Cli {
    /// Seed for sampling and synthesis.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Run log (JSON lines); defaults to <out>/runs.jsonl.
    #[arg(long, global = true)]
    pub log: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Find and validate payment addresses in chat logs.
    Extract {
        /// Chat files, one JSON record per line.
        #[arg(long, required = true, num_args = 1..)]
        chat: Vec<PathBuf>,
    },
    /// Validate address strings.
    Validate {
        addresses: Vec<String>,
        /// File with one candidate per line.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Load transaction files into a graph and write it back normalised.
    Ingest {
        #[arg(long, required = true, num_args = 1..)]
        txs: Vec<PathBuf>,
    },
    /// Download address histories through the caching client.
    Fetch {
        #[arg(long)]
        addr_file: PathBuf,
        #[arg(long)]
        cache: PathBuf,
        #[arg(long)]
        endpoint: String,
        /// Requests per second, e.g. `2` or `2/s`.
        #[arg(long, default_value = "1/s", value_parser = parse_rate)]
        rate: f64,
        #[arg(long, default_value_t = 50)]
        page_size: usize,
    },
    /// Classify candidate ransom addresses.
    Detect(DetectArgs),
    /// Co-spend clusters of a transaction graph.
    Cluster {
        #[arg(long, required = true, num_args = 1..)]
        txs: Vec<PathBuf>,
    },
    /// Economic reports.
    Report(ReportArgs),
    /// Chat-log analysis: centrality, annotation sampling, agreement.
    #[command(subcommand)]
    Chat(ChatCommand),
    /// Synthetic economies and detector scoring.
    #[command(subcommand)]
    Synth(SynthCommand),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Extract { .. } => "extract".into(),
            Command::Validate { .. } => "validate".into(),
            Command::Ingest { .. } => "ingest".into(),
            Command::Fetch { .. } => "fetch".into(),
            Command::Detect(_) => "detect".into(),
            Command::Cluster { .. } => "cluster".into(),
            Command::Report(r) => format!("report {}", r.kind.name()),
            Command::Chat(c) => format!(
                "chat {}",
                match c {
                    ChatCommand::Rank { .. } => "rank",
                    ChatCommand::Kappa { .. } => "kappa",
                    ChatCommand::Sample { .. } => "sample",
                }
            ),
            Command::Synth(s) => format!(
                "synth {}",
                match s {
                    SynthCommand::Generate { .. } => "generate",
                    SynthCommand::Score { .. } => "score",
                }
            ),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub txs: Vec<PathBuf>,
    /// Addresses to classify, one per line.
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub leak_addrs: PathBuf,
    #[arg(long)]
    pub entities: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub tol_pp: f64,
    #[arg(long, default_value_t = 8)]
    pub max_hops: u32,
    #[arg(long, default_value_t = 0.99)]
    pub threshold: f64,
    /// Era cutoff: a date (midnight UTC) or an RFC 3339 instant.
    #[arg(long, default_value = "2020-03-01", value_parser = parse_instant)]
    pub cutoff: chrono::DateTime<chrono::Utc>,
    /// Trace unattributed funding back this many extra hops.
    #[arg(long)]
    pub haircut_depth: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Summary,
    Origins,
    Aliases,
    Flows,
}

impl ReportKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReportKind::Summary => "summary",
            ReportKind::Origins => "origins",
            ReportKind::Aliases => "aliases",
            ReportKind::Flows => "flows",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Csv,
    GraphText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapArg {
    Strict,
    Carry,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    #[arg(value_enum)]
    pub kind: ReportKind,
    #[arg(long, required = true, num_args = 1..)]
    pub txs: Vec<PathBuf>,
    #[arg(long)]
    pub rates: PathBuf,
    #[arg(long, value_enum, default_value = "strict")]
    pub gap_policy: GapArg,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub entities: Option<PathBuf>,
    #[arg(long)]
    pub verdicts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatCommand {
    /// Rank aliases by message count, per server.
    Rank {
        #[arg(long, required = true, num_args = 1..)]
        chat: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        top: usize,
    },
    /// Fleiss' kappa over filled-in annotation worksheets.
    Kappa {
        #[arg(long, required = true, num_args = 2..)]
        worksheets: Vec<PathBuf>,
    },
    /// Draw a seeded annotation worksheet from extracted addresses.
    Sample {
        #[arg(long, required = true, num_args = 1..)]
        chat: Vec<PathBuf>,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthCommand {
    /// Generate a scenario from a TOML config into --out.
    Generate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score a verdict file against a manifest.
    Score {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn parse_rate(s: &str) -> Result<f64, String> {
    let n = s.strip_suffix("/s").unwrap_or(s);
    match n.trim().parse::<f64>() {
        Ok(r) if r > 0.0 && r.is_finite() => Ok(r),
        _ => Err(format!("invalid rate {s:?} (expected N or N/s, N > 0)")),
    }
}

fn parse_instant(s: &str) -> Result<chrono::DateTime<chrono::Utc>, String> {
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&chrono::Utc));
    }
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc())
        .map_err(|_| format!("invalid instant {s:?} (expected YYYY-MM-DD or RFC 3339)"))
}

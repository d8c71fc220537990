//! Command-line front end. Every subcommand reads files, writes its outputs
//! atomically under `--out`, and appends a [`RunRecord`] to the run log.

mod args;
mod commands;
mod record;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

pub use args::{ChatCommand, Cli, Command, ReportKind, SynthCommand};
pub use record::{digest_file, FileDigest, RunRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn report(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
    }
}

macro_rules! data_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}

data_errors!(
    crate::ledger::LedgerError,
    crate::labels::LabelError,
    crate::valuation::ValuationError,
    crate::heuristics::HeuristicError,
    crate::econ::EconError,
    crate::chat::ChatError,
    crate::synth::SynthError
);

/// Per-run bookkeeping: output directory, seed, and the files touched.
pub struct Context {
    pub out: PathBuf,
    pub seed: Option<u64>,
    subcommand: String,
    parameters: serde_json::Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        Ok(Context {
            out: cli.out.clone(),
            seed: cli.seed,
            subcommand: cli.command.name(),
            parameters: serde_json::to_value(cli).map_err(internal)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// Content-derived id over the subcommand, parameters and the inputs
    /// registered so far. Output and log locations do not contribute.
    fn run_id(&self) -> Result<String, CliError> {
        let digests = record::digest_all(&self.inputs).map_err(internal)?;
        Ok(record::run_id(&self.subcommand, &self.identity(), &digests))
    }

    fn identity(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.parameters.get("command"),
            "seed": self.seed,
        })
    }

    /// Registers an input file and checks it exists.
    fn input(&mut self, p: &Path) -> Result<PathBuf, CliError> {
        if !p.is_file() {
            return Err(CliError::Data(format!("input file not found: {}", p.display())));
        }
        self.inputs.push(p.to_path_buf());
        Ok(p.to_path_buf())
    }

    fn inputs(&mut self, ps: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
        ps.iter().map(|p| self.input(p)).collect()
    }

    fn open(&mut self, p: &Path) -> Result<std::io::BufReader<std::fs::File>, CliError> {
        let p = self.input(p)?;
        let f = std::fs::File::open(&p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        Ok(std::io::BufReader::new(f))
    }

    /// Writes `bytes` to `--out/name` atomically.
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(internal)?;
        let path = self.out.join(name);
        crate::fsutil::write_atomic(&path, bytes).map_err(internal)?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    fn produced(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.outputs.extend(paths);
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code; errors are reported as JSON on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.report());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(record) => {
            println!("{}", serde_json::to_string(&record.summary).unwrap_or_default());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}

/// Runs a parsed command and appends its run record to the log.
pub fn execute(cli: &Cli) -> Result<RunRecord, CliError> {
    let mut ctx = Context::new(cli)?;
    let summary = commands::dispatch(&cli.command, &mut ctx)?;
    let record = RunRecord::build(&ctx, summary).map_err(internal)?;
    let log = cli.log.clone().unwrap_or_else(|| cli.out.join("runs.jsonl"));
    record.append(&log).map_err(internal)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> i32 {
        let out = dir.join("out");
        let mut full = vec!["ransomtrace".to_string(), "--out".into(), out.display().to_string()];
        full.extend(args.iter().map(|s| s.to_string()));
        run(full)
    }

    #[test]
    fn missing_required_flag_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run_in(dir.path(), &["detect", "--txs", "x.jsonl"]), EXIT_USAGE);
        assert_eq!(run_in(dir.path(), &["no-such-command"]), EXIT_USAGE);
    }

    #[test]
    fn help_exits_cleanly() {
        assert_eq!(run(["ransomtrace", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_input_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let code = run_in(dir.path(), &["cluster", "--txs", "/nonexistent/t.jsonl"]);
        assert_eq!(code, EXIT_DATA);
    }

    #[test]
    fn validate_writes_table_and_log() {
        let dir = tempfile::tempdir().unwrap();
        let code = run_in(dir.path(), &["validate", "1BvBMSEYstWetqTFn5Au4m4GFg7xJaNVN2", "1BvBMSEYstWetqTFn5Au4m4GFg7xJaNVN3"]);
        assert_eq!(code, EXIT_OK);
        let table = std::fs::read_to_string(dir.path().join("out/validation.csv")).unwrap();
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains(",false,,,,checksum"));
        let log = RunRecord::read_log(&dir.path().join("out/runs.jsonl")).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].subcommand, "validate");
        assert_eq!(log[0].outputs.len(), 1);
        assert_eq!(log[0].summary["valid"], 1);
    }

    #[test]
    fn validate_without_addresses_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(run_in(dir.path(), &["validate"]), EXIT_USAGE);
    }

    #[test]
    fn run_id_ignores_output_location() {
        let a = Cli::try_parse_from(["rt", "--out", "a", "validate", "x"]).unwrap();
        let b = Cli::try_parse_from(["rt", "--out", "b", "validate", "x"]).unwrap();
        let c = Cli::try_parse_from(["rt", "--out", "a", "validate", "y"]).unwrap();
        let id = |cli: &Cli| Context::new(cli).unwrap().run_id().unwrap();
        assert_eq!(id(&a), id(&b));
        assert_ne!(id(&a), id(&c));
    }

    #[test]
    fn report_without_entities_is_usage() {
        let dir = tempfile::tempdir().unwrap();
        let txs = dir.path().join("t.jsonl");
        let rates = dir.path().join("r.csv");
        std::fs::write(&txs, "").unwrap();
        std::fs::write(&rates, "date,close_usd\n2020-01-01,7200.00\n").unwrap();
        let code = run_in(
            dir.path(),
            &["report", "origins", "--txs", txs.to_str().unwrap(), "--rates", rates.to_str().unwrap()],
        );
        assert_eq!(code, EXIT_USAGE);
    }
}

//! Transaction ingest: the immutable [`TxGraph`], its line-delimited file
//! format and an offline-first fetch client.

mod fetch;
mod graph;
mod tx;

pub use fetch::{FetchClient, FetchConfig};
pub use graph::TxGraph;
pub use tx::{Transaction, TxSlot, Txid, SATS_PER_BTC};

use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

use crate::addr::Address;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("conflicting duplicate transaction {0}")]
    ConflictingDuplicate(Txid),
    #[error("malformed record at {position}: {reason}")]
    MalformedRecord { position: usize, reason: String },
    #[error("address {0} not in graph")]
    UnknownAddress(Address),
    #[error("transport error (retryable): {0}")]
    Transport(String),
    #[error("service rejected request with status {status}: {body}")]
    ServiceRejection { status: u16, body: String },
}

impl LedgerError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LedgerError::Transport(_))
    }
}

/// Reads line-delimited transaction records. Blank lines are skipped;
/// positions in errors are 1-based line numbers.
pub fn read_transactions<R: BufRead>(reader: R) -> Result<Vec<Transaction>, LedgerError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tx: Transaction =
            serde_json::from_str(&line).map_err(|e| LedgerError::MalformedRecord {
                position: i + 1,
                reason: e.to_string(),
            })?;
        tx.check().map_err(|reason| LedgerError::MalformedRecord {
            position: i + 1,
            reason,
        })?;
        out.push(tx);
    }
    Ok(out)
}

pub fn write_transactions<'a, W, I>(mut w: W, txs: I) -> Result<(), LedgerError>
where
    W: Write,
    I: IntoIterator<Item = &'a Transaction>,
{
    for tx in txs {
        serde_json::to_writer(&mut w, tx).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Loads and ingests one or more transaction files into a single graph.
pub fn load_graph<P: AsRef<Path>>(paths: &[P]) -> Result<TxGraph, LedgerError> {
    let mut all = Vec::new();
    for p in paths {
        let f = std::fs::File::open(p.as_ref())?;
        all.extend(read_transactions(std::io::BufReader::new(f))?);
    }
    TxGraph::ingest(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "\n{\"txid\":\"zz\"}\n";
        match read_transactions(text.as_bytes()) {
            Err(LedgerError::MalformedRecord { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_address_is_malformed() {
        let text = r#"{"txid":"00000000000000000000000000000000000000000000000000000000000000aa","time":1,"inputs":[],"outputs":[{"addr":"1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNb","value_sats":1}],"fee_sats":0}"#;
        assert!(matches!(
            read_transactions(text.as_bytes()),
            Err(LedgerError::MalformedRecord { position: 1, .. })
        ));
    }
}

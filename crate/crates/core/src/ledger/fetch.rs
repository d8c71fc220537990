//! Caching client for a blockchain explorer's per-address history endpoint.
//!
//! Requests go to `{endpoint}/rawaddr/{address}?limit=N&offset=M` and the
//! response is expected in the blockchain.com `rawaddr` JSON shape. Every
//! result is written to `{cache_dir}/{address}.jsonl` in the ingest format,
//! and later calls for the same address never touch the network.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::DateTime;
use serde::Deserialize;

use super::{read_transactions, write_transactions, LedgerError, Transaction, TxSlot};
use crate::addr::{validate, Address};

#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub endpoint: String,
    /// Maximum requests per second.
    pub rate_per_sec: f64,
    pub cache_dir: PathBuf,
    pub page_size: usize,
    pub max_retries: u32,
    pub timeout: Duration,
}

impl FetchConfig {
    pub fn new(endpoint: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Self {
        FetchConfig {
            endpoint: endpoint.into(),
            rate_per_sec: 1.0,
            cache_dir: cache_dir.into(),
            page_size: 50,
            max_retries: 3,
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Deserialize)]
struct RawAddress {
    #[serde(default)]
    n_tx: Option<usize>,
    txs: Vec<RawTx>,
}

#[derive(Deserialize)]
struct RawTx {
    hash: String,
    time: i64,
    #[serde(default)]
    fee: Option<u64>,
    inputs: Vec<RawInput>,
    out: Vec<RawOut>,
}

#[derive(Deserialize)]
struct RawInput {
    #[serde(default)]
    prev_out: Option<RawOut>,
}

#[derive(Deserialize)]
struct RawOut {
    #[serde(default)]
    addr: Option<String>,
    #[serde(default)]
    value: u64,
}

fn convert_slot(raw: &RawOut, position: usize) -> Result<Option<TxSlot>, LedgerError> {
    match &raw.addr {
        Some(s) => {
            let a = validate(s).map_err(|e| LedgerError::MalformedRecord {
                position,
                reason: format!("address {s:?}: {e}"),
            })?;
            Ok(Some(TxSlot::new(a, raw.value)))
        }
        // Zero-value script outputs (OP_RETURN) and coinbase inputs carry no address.
        None if raw.value == 0 => Ok(None),
        None => Err(LedgerError::MalformedRecord {
            position,
            reason: "value-bearing slot without a supported address".into(),
        }),
    }
}

fn convert_tx(raw: &RawTx, position: usize) -> Result<Transaction, LedgerError> {
    let malformed = |reason: String| LedgerError::MalformedRecord { position, reason };
    let txid = raw.hash.parse().map_err(malformed)?;
    let timestamp = DateTime::from_timestamp(raw.time, 0)
        .ok_or_else(|| malformed(format!("bad time {}", raw.time)))?;
    let mut inputs = Vec::new();
    for i in &raw.inputs {
        if let Some(prev) = &i.prev_out {
            if let Some(s) = convert_slot(prev, position)? {
                inputs.push(s);
            }
        }
    }
    let mut outputs = Vec::new();
    for o in &raw.out {
        if let Some(s) = convert_slot(o, position)? {
            outputs.push(s);
        }
    }
    let mut tx = Transaction {
        txid,
        timestamp,
        inputs,
        outputs,
        fee_sats: 0,
    };
    if !tx.is_coinbase() {
        let derived = tx.total_in().checked_sub(tx.total_out()).ok_or_else(|| {
            malformed("outputs exceed inputs".into())
        })?;
        tx.fee_sats = raw.fee.unwrap_or(derived as u64);
    }
    tx.check().map_err(malformed)?;
    Ok(tx)
}

/// Blocking fetch client. Requests from all callers share one rate limiter.
pub struct FetchClient {
    config: FetchConfig,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl FetchClient {
    pub fn new(config: FetchConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        FetchClient {
            config,
            agent,
            last_request: Mutex::new(None),
        }
    }

    pub fn cache_path(&self, a: &Address) -> PathBuf {
        self.config.cache_dir.join(format!("{a}.jsonl"))
    }

    fn throttle(&self) {
        let interval = if self.config.rate_per_sec > 0.0 {
            Duration::from_secs_f64(1.0 / self.config.rate_per_sec)
        } else {
            Duration::ZERO
        };
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let ready = prev + interval;
            let now = Instant::now();
            if ready > now {
                std::thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }

    fn get_once(&self, url: &str) -> Result<String, LedgerError> {
        self.throttle();
        let mut resp = self
            .agent
            .get(url)
            .call()
            .map_err(|e| LedgerError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LedgerError::Transport(e.to_string()))?;
        match status {
            200..=299 => Ok(body),
            429 | 500..=599 => Err(LedgerError::Transport(format!("status {status}"))),
            _ => Err(LedgerError::ServiceRejection { status, body }),
        }
    }

    fn get(&self, url: &str) -> Result<String, LedgerError> {
        let mut attempt = 0;
        loop {
            match self.get_once(url) {
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => attempt += 1,
                other => return other,
            }
        }
    }

    fn fetch_remote(&self, a: &Address) -> Result<Vec<Transaction>, LedgerError> {
        let base = self.config.endpoint.trim_end_matches('/');
        let mut txs = Vec::new();
        let mut offset = 0;
        loop {
            let url = format!(
                "{base}/rawaddr/{a}?limit={}&offset={offset}",
                self.config.page_size
            );
            let body = self.get(&url)?;
            let page: RawAddress =
                serde_json::from_str(&body).map_err(|e| LedgerError::MalformedRecord {
                    position: offset + 1,
                    reason: e.to_string(),
                })?;
            let got = page.txs.len();
            for (i, raw) in page.txs.iter().enumerate() {
                txs.push(convert_tx(raw, offset + i + 1)?);
            }
            offset += got;
            let total = page.n_tx.unwrap_or(offset);
            if got == 0 || offset >= total {
                break;
            }
        }
        txs.sort_by(|x, y| x.timestamp.cmp(&y.timestamp).then(x.txid.cmp(&y.txid)));
        txs.dedup_by(|x, y| x.txid == y.txid);
        Ok(txs)
    }

    /// Returns the address's history, from cache when present.
    pub fn fetch_address_history(&self, a: &Address) -> Result<Vec<Transaction>, LedgerError> {
        let path = self.cache_path(a);
        if path.exists() {
            let f = std::fs::File::open(&path)?;
            return read_transactions(std::io::BufReader::new(f));
        }
        let txs = self.fetch_remote(a)?;
        write_atomic(&path, &txs)?;
        Ok(txs)
    }
}

fn write_atomic(path: &Path, txs: &[Transaction]) -> Result<(), LedgerError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    write_transactions(&mut buf, txs)?;
    crate::fsutil::write_atomic(path, &buf)?;
    Ok(())
}

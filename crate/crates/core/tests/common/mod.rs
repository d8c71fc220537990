//! Shared builders for the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use ransomtrace::addr::{Address, ScriptKind};
use ransomtrace::labels::{EntityKey, EntityKind, EntityRecord, EntityStore, Risk};
use ransomtrace::ledger::{write_transactions, Transaction, TxGraph, TxSlot, Txid, SATS_PER_BTC};

/// Distinct P2WPKH address per index.
pub fn addr(n: u32) -> Address {
    let mut payload = [0x5a; 20];
    payload[..4].copy_from_slice(&n.to_be_bytes());
    Address::from_payload(ScriptKind::P2WPKH, &payload).unwrap()
}

pub fn txid(n: u32) -> Txid {
    let mut b = [0u8; 32];
    b[28..].copy_from_slice(&n.to_be_bytes());
    Txid(b)
}

pub fn at(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).single().unwrap()
}

/// Transaction with explicit slots; the fee is whatever inputs leave over.
pub fn tx(id: u32, t: DateTime<Utc>, ins: &[(u32, u64)], outs: &[(u32, u64)]) -> Transaction {
    let total_in: u64 = ins.iter().map(|s| s.1).sum();
    let total_out: u64 = outs.iter().map(|s| s.1).sum();
    Transaction {
        txid: txid(id),
        timestamp: t,
        inputs: ins.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
        outputs: outs.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
        fee_sats: if ins.is_empty() { 0 } else { total_in - total_out },
    }
}

pub const BTC: u64 = SATS_PER_BTC;

pub const GEMINI: u32 = 1;
pub const VICTIM_PAYMENT: u32 = 10;
pub const AFFILIATE: u32 = 11;
pub const OPERATOR: u32 = 12;
pub const HOP: u32 = 13;
pub const LEAK_WALLET: u32 = 14;

/// A ransom address funded with 22 BTC from a Gemini hot wallet, split 25/75
/// on its first spend, with 1 BTC of the affiliate share later reaching a
/// wallet from the leaked chats.
pub struct QuarterSplit {
    pub transactions: Vec<Transaction>,
    pub entities: EntityStore,
    pub leak: HashSet<Address>,
    pub candidate: Address,
}

pub fn quarter_split(first_use: DateTime<Utc>) -> QuarterSplit {
    let day = chrono::Duration::days(1);
    let fee = 12_000;
    let transactions = vec![
        tx(1, first_use - day * 30, &[], &[(GEMINI, 100 * BTC)]),
        tx(2, first_use, &[(GEMINI, 100 * BTC)], &[(VICTIM_PAYMENT, 22 * BTC), (GEMINI, 78 * BTC - 5_000)]),
        tx(
            3,
            first_use + day,
            &[(VICTIM_PAYMENT, 22 * BTC)],
            &[(AFFILIATE, 55 * BTC / 10), (OPERATOR, 165 * BTC / 10 - fee)],
        ),
        tx(4, first_use + day * 3, &[(AFFILIATE, 55 * BTC / 10)], &[(HOP, BTC), (AFFILIATE, 45 * BTC / 10 - 3_000)]),
        tx(5, first_use + day * 9, &[(HOP, BTC)], &[(LEAK_WALLET, BTC - 2_000)]),
    ];
    let entities = EntityStore::from_records(vec![EntityRecord {
        key: EntityKey::Address(addr(GEMINI)),
        entity_name: "Gemini".into(),
        kind: EntityKind::Exchange,
        risk: Some(Risk::Low),
    }])
    .unwrap();
    QuarterSplit {
        transactions,
        entities,
        leak: HashSet::from([addr(LEAK_WALLET)]),
        candidate: addr(VICTIM_PAYMENT),
    }
}

impl QuarterSplit {
    pub fn graph(&self) -> TxGraph {
        TxGraph::ingest(self.transactions.clone()).unwrap()
    }

    /// Writes transactions.jsonl, entities.csv, leak_addrs.txt and
    /// candidates.txt into `dir`.
    pub fn write_to(&self, dir: &Path) {
        std::fs::create_dir_all(dir).unwrap();
        let mut buf = Vec::new();
        write_transactions(&mut buf, &self.transactions).unwrap();
        std::fs::write(dir.join("transactions.jsonl"), buf).unwrap();
        let mut buf = Vec::new();
        self.entities.dump(&mut buf).unwrap();
        std::fs::write(dir.join("entities.csv"), buf).unwrap();
        let leak: Vec<String> = self.leak.iter().map(|a| format!("{a}\n")).collect();
        std::fs::write(dir.join("leak_addrs.txt"), leak.concat()).unwrap();
        std::fs::write(dir.join("candidates.txt"), format!("{}\n", self.candidate)).unwrap();
    }
}

/// Connected components of the co-input relation, by breadth-first search
/// over an explicit address adjacency list.
pub fn brute_force_components(txs: &[Transaction], universe: &[Address]) -> Vec<Vec<Address>> {
    use std::collections::{BTreeMap, BTreeSet, VecDeque};
    let mut adj: BTreeMap<&Address, BTreeSet<&Address>> = universe.iter().map(|a| (a, BTreeSet::new())).collect();
    for tx in txs {
        for x in &tx.inputs {
            for y in &tx.inputs {
                adj.get_mut(&x.address).unwrap().insert(&y.address);
            }
        }
    }
    let mut seen: BTreeSet<&Address> = BTreeSet::new();
    let mut sets = Vec::new();
    for a in universe {
        if !seen.insert(a) {
            continue;
        }
        let mut comp = vec![a.clone()];
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if seen.insert(y) {
                    comp.push(y.clone());
                    queue.push_back(y);
                }
            }
        }
        comp.sort();
        sets.push(comp);
    }
    sets.sort();
    sets
}

/// Expense-label fixture with 419 salary, 15 reimbursement/salary and 227
/// reimbursement addresses plus a handful of leak-labelled ransom wallets.
/// Every credit is valued independently in `expected_cents` (salary,
/// reimbursement/salary, reimbursement, leak ransom).
pub struct ExpenseFixture {
    pub transactions: Vec<Transaction>,
    pub labels: ransomtrace::labels::LabelStore,
    pub rates: ransomtrace::valuation::RateTable,
    pub expected_cents: [i128; 4],
    pub ransom_addresses: usize,
}

/// Half-even rounding of `sats * rate_cents / 1e8` in integers.
pub fn cents_of(sats: u64, rate_cents: i128) -> i128 {
    let num = sats as i128 * rate_cents;
    let (q, r) = (num / 100_000_000, num % 100_000_000);
    match (r * 2).cmp(&100_000_000) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    }
}

pub fn expense_fixture(seed: u64) -> ExpenseFixture {
    use rand::{Rng, SeedableRng};
    use ransomtrace::labels::{Category, LabelRecord, LabelSource, LabelStore};
    use ransomtrace::valuation::RateTable;
    use rust_decimal::Decimal;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let first_day = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let days = 730usize;
    let rate_cents: Vec<i128> = (0..days).map(|_| rng.random_range(500_000..6_500_000)).collect();
    let rates = RateTable::from_rows(
        rate_cents
            .iter()
            .enumerate()
            .map(|(i, &c)| (first_day + chrono::Duration::days(i as i64), Decimal::new(c as i64, 2))),
    )
    .unwrap();

    const TREASURY: u32 = 900_000;
    let mut transactions = vec![tx(1, at(2019, 12, 1), &[], &[(TREASURY, 1_000_000 * BTC)])];
    let mut treasury = 1_000_000 * BTC;
    let mut next_id = 2;
    let mut records = Vec::new();
    let mut expected = [0i128; 4];
    let label = |n: u32, category, source| LabelRecord {
        address: addr(n),
        category,
        source,
        owner_alias: None,
        note: String::new(),
    };

    // (row index, count): salary, reimbursement/salary, reimbursement, ransom.
    let plan = [(0usize, 419u32), (1, 15), (2, 227), (3, 6)];
    let mut n = 1_000;
    for (row, count) in plan {
        for k in 0..count {
            n += 1;
            match row {
                0 => records.push(label(n, Category::Salary, LabelSource::LeakAnnotation)),
                1 if k % 3 == 0 => {
                    records.push(label(n, Category::Salary, LabelSource::LeakAnnotation));
                    records.push(label(n, Category::Reimbursement, LabelSource::LeakAnnotation));
                }
                1 => records.push(label(n, Category::ReimbursementSalary, LabelSource::LeakAnnotation)),
                2 => records.push(label(n, Category::Reimbursement, LabelSource::LeakAnnotation)),
                _ => records.push(label(n, Category::RansomPayment, LabelSource::LeakAnnotation)),
            }
            for _ in 0..rng.random_range(1..=3) {
                let day = rng.random_range(0..days);
                let sats = if row == 3 { rng.random_range(BTC..50 * BTC) } else { rng.random_range(10_000..2 * BTC) };
                let t = at(2020, 1, 1) + chrono::Duration::days(day as i64) + chrono::Duration::seconds(rng.random_range(0..40_000));
                let fee = 1_000;
                let keep = treasury - sats - fee;
                transactions.push(tx(next_id, t, &[(TREASURY, treasury)], &[(n, sats), (TREASURY, keep)]));
                treasury = keep;
                next_id += 1;
                expected[row] += cents_of(sats, rate_cents[day]);
            }
        }
    }
    // Timestamps are random, so the treasury chain is only value-consistent,
    // not time-ordered; the graph does not require spend order.
    ExpenseFixture {
        transactions,
        labels: LabelStore::from_records(records),
        rates,
        expected_cents: expected,
        ransom_addresses: 6,
    }
}

/// Runs the CLI binary inside `dir` and returns (exit code, stdout, stderr).
pub fn cli(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ransomtrace"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

pub const SMALL_SCENARIO: &str = "seed = 17\nvictims = 20\nnoise_addresses = 30\nera_boundary_plants = 4\n\
     [near_miss]\nwrong_percent = 5\nno_leak = 5\ndirty_funding = 5\n";

/// Full pipeline with relative paths: synth generate, extract, ingest,
/// detect, cluster and every report. Panics on a non-zero exit.
pub fn run_pipeline(dir: &Path) {
    std::fs::write(dir.join("scenario.toml"), SMALL_SCENARIO).unwrap();
    let steps: Vec<Vec<&str>> = vec![
        vec!["--out", "scen", "synth", "generate", "--config", "scenario.toml"],
        vec!["--out", "run", "extract", "--chat", "scen/chat.jsonl"],
        vec!["--out", "run", "ingest", "--txs", "scen/transactions.jsonl"],
        vec![
            "--out", "run", "detect", "--txs", "run/transactions.jsonl", "--candidates", "scen/candidates.txt",
            "--leak-addrs", "scen/leak_addrs.txt", "--entities", "scen/entities.csv",
        ],
        vec!["--out", "run", "cluster", "--txs", "run/transactions.jsonl"],
        vec!["--out", "run", "synth", "score", "--verdicts", "run/verdicts.csv", "--manifest", "scen/manifest.json"],
    ];
    for s in &steps {
        let (code, _, err) = cli(dir, s);
        assert_eq!(code, 0, "{s:?}: {err}");
    }
    for kind in ["summary", "origins", "aliases", "flows"] {
        for format in ["csv", "graph-text"] {
            let args = [
                "--out", "run", "report", kind, "--txs", "run/transactions.jsonl", "--rates", "scen/rates.csv",
                "--labels", "scen/labels.csv", "--entities", "scen/entities.csv", "--verdicts", "run/verdicts.csv",
                "--format", format,
            ];
            let (code, _, err) = cli(dir, &args);
            assert_eq!(code, 0, "report {kind}: {err}");
        }
    }
}

/// Every output file of a pipeline run except the timestamped run log.
pub fn pipeline_outputs(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    for sub in ["scen", "run"] {
        for e in std::fs::read_dir(dir.join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.file_name().is_some_and(|n| n != "runs.jsonl") {
                out.insert(format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use super::manifest::{
    usd_cents, ChatTruth, GroundTruthManifest, LedgerCents, PlantKind, PlantedCandidate,
};
use super::{ScenarioConfig, SynthError, SPLIT_GRID};
use crate::addr::{validate, Address, ScriptKind};
use crate::chat::{ChatMessage, Corpus, Server};
use crate::heuristics::Strain;
use crate::labels::{
    Category, EntityKey, EntityKind, EntityRecord, EntityStore, LabelRecord, LabelSource,
    LabelStore, Risk, UNLABELED_CLUSTER,
};
use crate::ledger::{write_transactions, Transaction, TxGraph, TxSlot, Txid};
use crate::valuation::RateTable;

/// Output file names, in the order `write_to` produces them.
pub const SCENARIO_FILES: [&str; 9] = [
    "config.toml",
    "transactions.jsonl",
    "labels.csv",
    "entities.csv",
    "rates.csv",
    "leak_addrs.txt",
    "candidates.txt",
    "chat.jsonl",
    "manifest.json",
];

/// A generated economy held in memory.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Sorted by `(timestamp, txid)`.
    pub transactions: Vec<Transaction>,
    pub labels: LabelStore,
    pub entities: EntityStore,
    pub rates: RateTable,
    /// Sorted.
    pub leak: Vec<Address>,
    /// Sorted.
    pub candidates: Vec<Address>,
    pub chat: Vec<ChatMessage>,
    pub manifest: GroundTruthManifest,
}

impl Scenario {
    pub fn graph(&self) -> TxGraph {
        TxGraph::ingest(self.transactions.iter().cloned()).expect("generated transactions are consistent")
    }

    /// Writes every file in [`SCENARIO_FILES`] under `dir`, each atomically.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for name in SCENARIO_FILES {
            let mut buf: Vec<u8> = Vec::new();
            match name {
                "config.toml" => buf.extend_from_slice(self.config.to_toml().as_bytes()),
                "transactions.jsonl" => write_transactions(&mut buf, &self.transactions)?,
                "labels.csv" => self.labels.dump(&mut buf)?,
                "entities.csv" => self.entities.dump(&mut buf)?,
                "rates.csv" => self.rates.write(&mut buf)?,
                "leak_addrs.txt" => lines(&mut buf, &self.leak),
                "candidates.txt" => lines(&mut buf, &self.candidates),
                "chat.jsonl" => Corpus::write_jsonl(&mut buf, &self.chat)?,
                "manifest.json" => self.manifest.write(&mut buf)?,
                _ => unreachable!("unlisted scenario file"),
            }
            let path = dir.join(name);
            crate::fsutil::write_atomic(&path, &buf)?;
            out.push(path);
        }
        Ok(out)
    }
}

fn lines(buf: &mut Vec<u8>, addrs: &[Address]) {
    for a in addrs {
        buf.extend_from_slice(a.as_str().as_bytes());
        buf.push(b'\n');
    }
}

struct Source {
    name: String,
    members: Vec<Address>,
}

struct Gen {
    rng: ChaCha8Rng,
    used: HashSet<Address>,
    txids: HashSet<Txid>,
    txs: Vec<Transaction>,
    fee_range: (u64, u64),
}

impl Gen {
    fn address(&mut self) -> Address {
        loop {
            let kind = match self.rng.random_range(0..10) {
                0..=3 => ScriptKind::P2PKH,
                4..=5 => ScriptKind::P2SH,
                6..=8 => ScriptKind::P2WPKH,
                _ => ScriptKind::P2WSH,
            };
            let len = if kind == ScriptKind::P2WSH { 32 } else { 20 };
            let mut payload = vec![0u8; len];
            self.rng.fill(payload.as_mut_slice());
            let a = Address::from_payload(kind, &payload).expect("valid payload length");
            if self.used.insert(a.clone()) {
                return a;
            }
        }
    }

    /// Fee for a transaction of the given shape at a random rate.
    fn fee(&mut self, n_in: usize, n_out: usize) -> u64 {
        let rate = self.rng.random_range(self.fee_range.0..=self.fee_range.1);
        rate * (11 + 68 * n_in as u64 + 31 * n_out as u64)
    }

    fn push(&mut self, t: DateTime<Utc>, inputs: Vec<TxSlot>, outputs: Vec<TxSlot>) {
        let total_in: u64 = inputs.iter().map(|s| s.value_sats).sum();
        let total_out: u64 = outputs.iter().map(|s| s.value_sats).sum();
        let fee_sats = if inputs.is_empty() { 0 } else { total_in - total_out };
        let txid = loop {
            let mut b = [0u8; 32];
            self.rng.fill(&mut b);
            if self.txids.insert(Txid(b)) {
                break Txid(b);
            }
        };
        self.txs.push(Transaction {
            txid,
            timestamp: t,
            inputs,
            outputs,
            fee_sats,
        });
    }

    /// Single-input, single-output payment of `value` (fee on top).
    fn pay(&mut self, t: DateTime<Utc>, from: &Address, to: &Address, value: u64) {
        let fee = self.fee(1, 1);
        self.push(t, vec![TxSlot::new(from.clone(), value + fee)], vec![TxSlot::new(to.clone(), value)]);
    }

    fn instant(&mut self, lo: DateTime<Utc>, hi: DateTime<Utc>) -> DateTime<Utc> {
        let span = (hi - lo).num_seconds().max(1);
        lo + Duration::seconds(self.rng.random_range(0..span))
    }

    fn hours(&mut self, lo: i64, hi: i64) -> Duration {
        Duration::seconds(self.rng.random_range(lo * 3600..hi * 3600))
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        xs.choose(&mut self.rng).expect("non-empty choice")
    }

    /// Consolidates `members` into the first one, merging them into one co-spend cluster.
    fn consolidate(&mut self, t: DateTime<Utc>, members: &[Address]) {
        if members.len() < 2 {
            return;
        }
        let fee = self.fee(members.len(), 1);
        let each = 1_000_000u64;
        let inputs: Vec<TxSlot> = members.iter().map(|a| TxSlot::new(a.clone(), each)).collect();
        let total = each * members.len() as u64;
        self.push(t, inputs, vec![TxSlot::new(members[0].clone(), total - fee)]);
    }
}

const SATS_STEP: u64 = 10_000;

fn btc_to_steps(btc: f64) -> u64 {
    ((btc * 1e8) / SATS_STEP as f64).round().max(1.0) as u64
}

/// Builds a scenario from `cfg`. The same config always yields the same scenario.
pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, SynthError> {
    cfg.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        used: HashSet::new(),
        txids: HashSet::new(),
        txs: Vec::new(),
        fee_range: cfg.fee_sat_per_vb,
    };
    let (era_lo, era_hi) = cfg.era_bounds();

    // Entities.
    let mut entity_records = Vec::new();
    let mut clean: Vec<Source> = Vec::new();
    let mut dirty: Vec<Source> = Vec::new();
    let mut all_exchange_wallets: Vec<Address> = Vec::new();
    for ex in &cfg.exchanges {
        let members: Vec<Address> = (0..ex.hot_wallets).map(|_| g.address()).collect();
        if members.is_empty() {
            continue;
        }
        g.consolidate(era_lo, &members);
        entity_records.push(EntityRecord {
            key: EntityKey::Cluster(members[0].clone()),
            entity_name: ex.name.clone(),
            kind: EntityKind::Exchange,
            risk: Some(ex.risk),
        });
        all_exchange_wallets.extend(members.iter().cloned());
        let src = Source {
            name: ex.name.clone(),
            members,
        };
        if ex.risk == Risk::Low {
            clean.push(src);
        } else {
            dirty.push(src);
        }
    }
    if cfg.unlabeled_cluster_size > 0 {
        let members: Vec<Address> = (0..cfg.unlabeled_cluster_size).map(|_| g.address()).collect();
        g.consolidate(era_lo, &members);
        entity_records.push(EntityRecord {
            key: EntityKey::Cluster(members[0].clone()),
            entity_name: UNLABELED_CLUSTER.into(),
            kind: EntityKind::UnlabeledCluster,
            risk: None,
        });
        clean.push(Source {
            name: UNLABELED_CLUSTER.into(),
            members,
        });
    }
    let entities = EntityStore::from_records(entity_records).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;

    // Aliases and their leaked wallets.
    let expense_dist = WeightedIndex::new(cfg.expense_mix).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let mut labels: Vec<LabelRecord> = Vec::new();
    let aliases: Vec<String> = (1..=cfg.aliases).map(|i| format!("alias{i:02}")).collect();
    let mut alias_wallets: BTreeMap<String, Vec<(Address, Category)>> = BTreeMap::new();
    let mut leak: Vec<Address> = Vec::new();
    for alias in &aliases {
        for _ in 0..cfg.wallets_per_alias {
            let a = g.address();
            let category = [Category::Salary, Category::ReimbursementSalary, Category::Reimbursement]
                [expense_dist.sample(&mut g.rng)];
            for c in [category, Category::ClaimedOwnership] {
                labels.push(LabelRecord {
                    address: a.clone(),
                    category: c,
                    source: LabelSource::LeakAnnotation,
                    owner_alias: Some(alias.clone()),
                    note: String::new(),
                });
            }
            alias_wallets.entry(alias.clone()).or_default().push((a.clone(), category));
            leak.push(a);
        }
    }

    // Payroll from an unlabelled treasury.
    if cfg.payroll_payments > 0 {
        let treasury = g.address();
        for _ in 0..cfg.payroll_payments {
            let wallet = g.pick(&leak).clone();
            let value = g.rng.random_range(50..5_000u64) * SATS_STEP / 10;
            let t = g.instant(era_lo, era_hi);
            g.pay(t, &treasury, &wallet, value);
        }
    }

    // Candidates.
    let split_dist = WeightedIndex::new(cfg.split_weights).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let mut kinds: Vec<PlantKind> = Vec::with_capacity(cfg.candidate_count());
    kinds.extend(std::iter::repeat_n(PlantKind::Positive, cfg.victims));
    kinds.extend(std::iter::repeat_n(PlantKind::WrongPercent, cfg.near_miss.wrong_percent));
    kinds.extend(std::iter::repeat_n(PlantKind::NoLeak, cfg.near_miss.no_leak));
    kinds.extend(std::iter::repeat_n(PlantKind::DirtyFunding, cfg.near_miss.dirty_funding));
    kinds.extend(std::iter::repeat_n(PlantKind::Noise, cfg.noise_addresses));

    let (lo_steps, hi_steps) = (btc_to_steps(cfg.ransom_btc.0), btc_to_steps(cfg.ransom_btc.1));
    let mut planted: Vec<PlantedCandidate> = Vec::with_capacity(kinds.len());
    let mut ransom_labels: Vec<(Address, bool, bool)> = Vec::new();
    for (i, kind) in kinds.iter().copied().enumerate() {
        let v = g.address();
        let t0 = if kind == PlantKind::Positive && i < cfg.era_boundary_plants {
            // Alternate sides of the cutoff; pair k sits k hours out, the first exactly on it.
            let k = (i / 2) as i64 % 48;
            if i % 2 == 0 {
                cfg.era_cutoff - Duration::seconds(1) - Duration::hours(k)
            } else {
                cfg.era_cutoff + Duration::hours(k)
            }
        } else {
            g.instant(era_lo, era_hi)
        };
        let amount = g.rng.random_range(lo_steps..=hi_steps) * SATS_STEP;
        let mut funding: BTreeMap<String, u64> = BTreeMap::new();

        // Funding.
        match kind {
            PlantKind::Noise if i % 3 != 0 => {
                let from = g.address();
                g.pay(t0, &from, &v, amount);
                funding.insert("unknown".into(), amount);
            }
            PlantKind::DirtyFunding => {
                let share = g.rng.random_range(0.02..0.6);
                let dirty_sats = ((amount as f64 * share / SATS_STEP as f64).round() as u64).max(1) * SATS_STEP;
                let clean_sats = amount - dirty_sats;
                let src = &clean[g.rng.random_range(0..clean.len())];
                let from = g.pick(&src.members).clone();
                let name = src.name.clone();
                g.pay(t0, &from, &v, clean_sats);
                funding.insert(name, clean_sats);
                let (dname, dfrom) = if !dirty.is_empty() && g.rng.random_bool(0.5) {
                    let d = &dirty[g.rng.random_range(0..dirty.len())];
                    let name = d.name.clone();
                    (name, g.pick(&d.members).clone())
                } else {
                    ("unknown".to_string(), g.address())
                };
                g.pay(t0 + Duration::minutes(10), &dfrom, &v, dirty_sats);
                *funding.entry(dname).or_default() += dirty_sats;
            }
            _ => {
                let src = &clean[g.rng.random_range(0..clean.len())];
                let from = g.pick(&src.members).clone();
                let name = src.name.clone();
                g.pay(t0, &from, &v, amount);
                funding.insert(name, amount);
            }
        }

        // Spend.
        let t1 = t0 + g.hours(1, 6);
        let mut percent = None;
        match kind {
            PlantKind::Noise => match i % 3 {
                0 => {
                    let to = g.address();
                    let fee = g.fee(1, 1);
                    g.push(t1, vec![TxSlot::new(v.clone(), amount)], vec![TxSlot::new(to, amount - fee)]);
                }
                1 => {}
                _ => {
                    let fee = g.fee(1, 3);
                    let third = (amount - fee) / 3;
                    let outs = vec![
                        TxSlot::new(g.address(), third),
                        TxSlot::new(g.address(), third),
                        TxSlot::new(g.address(), amount - fee - 2 * third),
                    ];
                    g.push(t1, vec![TxSlot::new(v.clone(), amount)], outs);
                }
            },
            _ => {
                let p = SPLIT_GRID[split_dist.sample(&mut g.rng)];
                percent = Some(p);
                let small = if kind == PlantKind::WrongPercent {
                    let off = g.rng.random_range(1.5..2.5);
                    let sign = match p {
                        50 => -1.0,
                        5 => 1.0,
                        _ if g.rng.random_bool(0.5) => 1.0,
                        _ => -1.0,
                    };
                    (amount as f64 * (p as f64 + sign * off) / 100.0).round() as u64
                } else {
                    amount * p as u64 / 100
                };
                // Fees come out of the larger side.
                let fee = g.fee(1, 2);
                let large = amount - small - fee;
                let (d_small, d_large) = (g.address(), g.address());
                g.push(
                    t1,
                    vec![TxSlot::new(v.clone(), amount)],
                    vec![TxSlot::new(d_small.clone(), small), TxSlot::new(d_large.clone(), large)],
                );
                let sides = [(d_small, small), (d_large, large)];
                let to_leak = if kind == PlantKind::NoLeak { None } else { Some(g.rng.random_range(0..2)) };
                for (side, (dest, value)) in sides.into_iter().enumerate() {
                    let t2 = t1 + g.hours(1, 12);
                    if Some(side) == to_leak {
                        let hops = g.rng.random_range(1..=cfg.max_chain);
                        let (mut cur, mut val, mut t) = (dest, value, t2);
                        for h in 0..hops {
                            let next = if h + 1 == hops { g.pick(&leak).clone() } else { g.address() };
                            let fee = g.fee(1, 1);
                            g.push(t, vec![TxSlot::new(cur, val)], vec![TxSlot::new(next.clone(), val - fee)]);
                            cur = next;
                            val -= fee;
                            t += g.hours(1, 12);
                        }
                    } else if !all_exchange_wallets.is_empty() && g.rng.random_bool(0.5) {
                        let ex = g.pick(&all_exchange_wallets).clone();
                        let fee = g.fee(1, 1);
                        g.push(t2, vec![TxSlot::new(dest, value)], vec![TxSlot::new(ex, value - fee)]);
                    }
                }
            }
        }

        let strain = (kind == PlantKind::Positive).then(|| {
            if t0 < cfg.era_cutoff {
                Strain::Ryuk
            } else {
                Strain::Conti
            }
        });
        if kind == PlantKind::Positive {
            let in_leak = g.rng.random_bool(cfg.leak_label_fraction);
            let in_crowd = g.rng.random_bool(cfg.crowdsourced_fraction);
            if in_leak || in_crowd {
                ransom_labels.push((v.clone(), in_leak, in_crowd));
            }
        }
        let received: u64 = funding.values().sum();
        planted.push(PlantedCandidate {
            address: v,
            kind,
            percent,
            strain,
            first_seen: t0,
            received_sats: received,
            funding: funding
                .into_iter()
                .map(|(k, s)| (k, s as f64 / received as f64))
                .collect(),
        });
    }
    for (a, in_leak, in_crowd) in &ransom_labels {
        for (flag, source) in [(*in_leak, LabelSource::LeakAnnotation), (*in_crowd, LabelSource::CrowdsourcedDataset)] {
            if flag {
                labels.push(LabelRecord {
                    address: a.clone(),
                    category: Category::RansomPayment,
                    source,
                    owner_alias: None,
                    note: "planted".into(),
                });
            }
        }
    }

    // Rates cover every transaction date.
    let mut txs = std::mem::take(&mut g.txs);
    txs.sort_by(|x, y| x.timestamp.cmp(&y.timestamp).then(x.txid.cmp(&y.txid)));
    let first_day = txs.first().map_or(cfg.era_start, |t| t.timestamp.date_naive()).min(cfg.era_start);
    let last_day = txs.last().map_or(cfg.era_end, |t| t.timestamp.date_naive()).max(cfg.era_end);
    let rate_cents = rate_walk(&mut g.rng, first_day, last_day);
    let rates = RateTable::from_rows(rate_cents.iter().map(|(d, c)| (*d, Decimal::new(*c as i64, 2))))?;

    // Chat.
    let (chat, chat_truth) = chat_corpus(&mut g, cfg, &aliases, &alias_wallets, era_lo);

    // Ground truth, derived from the generated data without the library's analyses.
    let cents_of = |tx: &Transaction, sats: u64| usd_cents(sats, rate_cents[&tx.timestamp.date_naive()]);
    let credits_cents = |a: &Address| -> u64 {
        txs.iter()
            .flat_map(|tx| tx.outputs.iter().filter(|s| &s.address == a).map(move |s| cents_of(tx, s.value_sats)))
            .sum()
    };
    let mut ledger = LedgerCents::default();
    let labelled: BTreeMap<&Address, (bool, bool)> =
        ransom_labels.iter().map(|(a, l, c)| (a, (*l, *c))).collect();
    for c in planted.iter().filter(|c| c.kind == PlantKind::Positive) {
        let cents = credits_cents(&c.address);
        match labelled.get(&c.address) {
            Some((true, crowd)) => {
                ledger.leak_ransom += cents;
                ledger.ransom_overlap += *crowd as usize;
            }
            Some((false, true)) => ledger.crowdsourced_ransom += cents,
            _ if c.strain == Some(Strain::Ryuk) => ledger.likely_ryuk += cents,
            _ => ledger.likely_conti += cents,
        }
    }
    let mut alias_payroll_cents = BTreeMap::new();
    for (alias, wallets) in &alias_wallets {
        let mut total = 0;
        for (a, cat) in wallets {
            let cents = credits_cents(a);
            total += cents;
            match cat {
                Category::Salary => ledger.salary += cents,
                Category::ReimbursementSalary => ledger.reimbursement_salary += cents,
                _ => ledger.reimbursement += cents,
            }
        }
        alias_payroll_cents.insert(alias.clone(), total);
    }

    planted.sort_by(|x, y| x.address.cmp(&y.address));
    let candidates: Vec<Address> = planted.iter().map(|c| c.address.clone()).collect();
    leak.sort();
    let manifest = GroundTruthManifest {
        seed: cfg.seed,
        era_cutoff: cfg.era_cutoff,
        candidates: planted,
        cospend_clusters: cospend_components(&txs),
        alias_payroll_cents,
        ledger_cents: ledger,
        chat: chat_truth,
    };
    Ok(Scenario {
        config: cfg.clone(),
        transactions: txs,
        labels: LabelStore::from_records(labels),
        entities,
        rates,
        leak,
        candidates,
        chat,
        manifest,
    })
}

/// Daily closes in integer cents: a bounded multiplicative random walk.
fn rate_walk(rng: &mut ChaCha8Rng, first: NaiveDate, last: NaiveDate) -> BTreeMap<NaiveDate, u64> {
    let mut out = BTreeMap::new();
    let mut cents: u64 = rng.random_range(500_000..1_000_000);
    let mut d = first;
    while d <= last {
        out.insert(d, cents);
        let step: f64 = rng.random_range(-0.04..0.04);
        cents = ((cents as f64) * (1.0 + step)).round().max(10_000.0) as u64;
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Connected components of the shared-input graph, by breadth-first search.
fn cospend_components(txs: &[Transaction]) -> Vec<Vec<Address>> {
    let mut adj: BTreeMap<&Address, BTreeSet<&Address>> = BTreeMap::new();
    for tx in txs {
        for x in &tx.inputs {
            for y in &tx.inputs {
                if x.address != y.address {
                    adj.entry(&x.address).or_default().insert(&y.address);
                }
            }
        }
    }
    let mut seen: BTreeSet<&Address> = BTreeSet::new();
    let mut groups = Vec::new();
    for &start in adj.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start.clone()];
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &b in &adj[a] {
                if seen.insert(b) {
                    comp.push(b.clone());
                    queue.push_back(b);
                }
            }
        }
        comp.sort();
        groups.push(comp);
    }
    groups.sort();
    groups
}

const CHAT_LINES: [&str; 6] = [
    "ok",
    "when is payday",
    "check the panel",
    "new build is up",
    "call in 10",
    "done",
];

fn chat_corpus(
    g: &mut Gen,
    cfg: &ScenarioConfig,
    aliases: &[String],
    wallets: &BTreeMap<String, Vec<(Address, Category)>>,
    start: DateTime<Utc>,
) -> (Vec<ChatMessage>, ChatTruth) {
    let mut truth = ChatTruth::default();
    if cfg.chat_messages == 0 {
        return (Vec::new(), truth);
    }
    let hub = &aliases[0];
    let mut msgs = Vec::with_capacity(cfg.chat_messages + cfg.chat_decoys);
    let mut planted: BTreeSet<Address> = BTreeSet::new();
    let mut ts = start;
    let total = cfg.chat_messages + cfg.chat_decoys;
    let decoy_slots: BTreeSet<usize> = {
        let mut slots = BTreeSet::new();
        while slots.len() < cfg.chat_decoys {
            slots.insert(g.rng.random_range(0..total));
        }
        slots
    };
    for i in 0..total {
        ts += Duration::seconds(g.rng.random_range(30..3_600));
        let (from, to) = if aliases.len() < 3 || g.rng.random_bool(0.6) {
            let other = &aliases[g.rng.random_range(1..aliases.len())];
            if g.rng.random_bool(0.5) {
                (hub.clone(), other.clone())
            } else {
                (other.clone(), hub.clone())
            }
        } else {
            let x = g.rng.random_range(1..aliases.len());
            let mut y = g.rng.random_range(1..aliases.len() - 1);
            if y >= x {
                y += 1;
            }
            (aliases[x].clone(), aliases[y].clone())
        };
        if &from == hub || &to == hub {
            truth.hub_degree += 1;
        }
        let own = wallets.get(&from).filter(|w| !w.is_empty());
        let body = if decoy_slots.contains(&i) {
            let base = match own {
                Some(w) => w[g.rng.random_range(0..w.len())].0.clone(),
                None => g.address(),
            };
            truth.decoys += 1;
            format!("try {} instead", corrupt(g, &base))
        } else if let Some(w) = own.filter(|_| g.rng.random_bool(0.3)) {
            let a = w[g.rng.random_range(0..w.len())].0.clone();
            truth.mentions += 1;
            let body = match g.rng.random_range(0..3) {
                0 => format!("my btc {a}"),
                1 => format!("send salary to {a} pls"),
                _ => a.to_string(),
            };
            planted.insert(a);
            body
        } else {
            g.pick(&CHAT_LINES).to_string()
        };
        msgs.push(ChatMessage {
            id: i as u64,
            ts,
            from_alias: from,
            to_alias: to,
            body,
            server: Server::Jabber,
        });
    }
    truth.planted_addresses = planted.into_iter().collect();
    truth.hub_alias = Some(hub.clone());
    (msgs, truth)
}

/// Replaces one character so the string keeps its shape but fails validation.
fn corrupt(g: &mut Gen, a: &Address) -> String {
    let s = a.as_str();
    let lower = s.starts_with("bc1");
    let alphabet: &[u8] = if lower {
        b"qpzry9x8gf2tvdw0s3jn54khce6mua7l"
    } else {
        b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
    };
    loop {
        let mut bytes = s.as_bytes().to_vec();
        let pos = g.rng.random_range(if lower { 4 } else { 1 }..bytes.len());
        let c = *alphabet.choose(&mut g.rng).expect("alphabet");
        if c == bytes[pos] {
            continue;
        }
        bytes[pos] = c;
        let out = String::from_utf8(bytes).expect("ascii");
        if validate(&out).is_err() {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::{classify_all, cospend_clusters, DetectorParams};
    use crate::labels::EntityResolver;

    fn small() -> ScenarioConfig {
        ScenarioConfig::from_toml(
            "seed = 3\nvictims = 20\nnoise_addresses = 30\nera_boundary_plants = 4\n\
             chat_messages = 60\nchat_decoys = 5\npayroll_payments = 10\n\
             [near_miss]\nwrong_percent = 6\nno_leak = 6\ndirty_funding = 6\n",
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate(&small()).unwrap().write_to(a.path()).unwrap();
        generate(&small()).unwrap().write_to(b.path()).unwrap();
        for name in SCENARIO_FILES {
            let x = std::fs::read(a.path().join(name)).unwrap();
            let y = std::fs::read(b.path().join(name)).unwrap();
            assert_eq!(x, y, "{name} differs");
        }
    }

    #[test]
    fn zero_victims_is_a_valid_empty_economy() {
        let cfg = ScenarioConfig::from_toml(
            "victims = 0\nnoise_addresses = 0\nera_boundary_plants = 0\npayroll_payments = 0\nchat_messages = 0\nchat_decoys = 0\n[near_miss]\n",
        )
        .unwrap();
        let s = generate(&cfg).unwrap();
        assert!(s.candidates.is_empty());
        assert_eq!(s.manifest.positives().count(), 0);
        s.graph();
    }

    #[test]
    fn files_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let s = generate(&small()).unwrap();
        s.write_to(dir.path()).unwrap();
        let g = crate::ledger::load_graph(&[dir.path().join("transactions.jsonl")]).unwrap();
        assert_eq!(g.len(), s.transactions.len());
        let labels = LabelStore::load_path(dir.path().join("labels.csv")).unwrap();
        assert_eq!(labels, s.labels);
        let ents = EntityStore::load_path(dir.path().join("entities.csv")).unwrap();
        assert_eq!(ents, s.entities);
        let f = std::fs::File::open(dir.path().join("rates.csv")).unwrap();
        assert_eq!(RateTable::load(f).unwrap(), s.rates);
        let m = GroundTruthManifest::read(std::fs::File::open(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m, s.manifest);
        let chat = Corpus::load_files(&[dir.path().join("chat.jsonl")]).unwrap();
        assert_eq!(chat.len(), 65);
    }

    #[test]
    fn detector_recovers_small_scenario() {
        let s = generate(&small()).unwrap();
        let g = s.graph();
        let r = EntityResolver::new(&s.entities, Some(cospend_clusters(&g)));
        let leak: std::collections::HashSet<Address> = s.leak.iter().cloned().collect();
        let verdicts = classify_all(&s.candidates, &leak, &g, &r, &DetectorParams::default()).unwrap();
        let rows: Vec<_> = verdicts.iter().map(|v| v.to_row()).collect();
        let rep = super::super::score(&rows, &s.manifest).unwrap();
        assert_eq!((rep.precision, rep.recall), (1.0, 1.0), "{:?}", rep.to_json());
        assert!(rep.near_miss_escapes.is_empty());
        assert!(rep.strain_errors.is_empty() && rep.percent_errors.is_empty());
    }

    #[test]
    fn boundary_plants_straddle_cutoff() {
        let s = generate(&small()).unwrap();
        let cut = s.config.era_cutoff;
        let near: Vec<_> = s
            .manifest
            .positives()
            .filter(|c| (c.first_seen - cut).num_hours().abs() <= 48)
            .collect();
        assert!(near.iter().any(|c| c.strain == Some(Strain::Ryuk)));
        assert!(near.iter().any(|c| c.first_seen == cut && c.strain == Some(Strain::Conti)));
    }
}

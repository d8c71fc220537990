use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::heuristics::default_era_cutoff;
use crate::labels::Risk;

/// Grid of split percentages the generator draws from, in order.
pub const SPLIT_GRID: [u8; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeSpec {
    pub name: String,
    pub risk: Risk,
    /// Hot-wallet addresses, merged into one cluster by a co-spend.
    #[serde(default = "default_hot_wallets")]
    pub hot_wallets: usize,
}

fn default_hot_wallets() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearMissCounts {
    #[serde(default)]
    pub wrong_percent: usize,
    #[serde(default)]
    pub no_leak: usize,
    #[serde(default)]
    pub dirty_funding: usize,
}

impl NearMissCounts {
    pub fn total(&self) -> usize {
        self.wrong_percent + self.no_leak + self.dirty_funding
    }
}

/// Scenario description, read from TOML. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Planted ransom payments that satisfy all three criteria.
    pub victims: usize,
    pub near_miss: NearMissCounts,
    /// Candidate addresses with ordinary wallet behaviour.
    pub noise_addresses: usize,
    /// Weights for 5%, 10%, ..., 50%; must sum to one.
    pub split_weights: [f64; 10],
    /// Ransom size range in BTC.
    pub ransom_btc: (f64, f64),
    /// Fee rate range in sats per virtual byte.
    pub fee_sat_per_vb: (u64, u64),
    /// Maximum downstream hops from a split destination to a leak wallet.
    pub max_chain: u32,
    pub exchanges: Vec<ExchangeSpec>,
    pub unlabeled_cluster_size: usize,
    pub aliases: usize,
    pub wallets_per_alias: usize,
    /// Weights of salary, reimbursement/salary and reimbursement for alias wallets.
    pub expense_mix: [f64; 3],
    pub payroll_payments: usize,
    pub era_start: NaiveDate,
    pub era_end: NaiveDate,
    pub era_cutoff: DateTime<Utc>,
    /// Planted positives placed within two days of the era cutoff.
    pub era_boundary_plants: usize,
    /// Probability a positive also carries a leak ransom label.
    pub leak_label_fraction: f64,
    /// Probability a positive also carries a crowdsourced ransom label.
    pub crowdsourced_fraction: f64,
    pub chat_messages: usize,
    /// Base58 strings with broken checksums mixed into the chat.
    pub chat_decoys: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 42,
            victims: 100,
            near_miss: NearMissCounts {
                wrong_percent: 50,
                no_leak: 50,
                dirty_funding: 50,
            },
            noise_addresses: 750,
            split_weights: [0.05, 0.15, 0.10, 0.35, 0.10, 0.10, 0.05, 0.05, 0.03, 0.02],
            ransom_btc: (0.5, 60.0),
            fee_sat_per_vb: (2, 80),
            max_chain: 4,
            exchanges: vec![
                ExchangeSpec {
                    name: "Gemini".into(),
                    risk: Risk::Low,
                    hot_wallets: 3,
                },
                ExchangeSpec {
                    name: "Coinbase".into(),
                    risk: Risk::Low,
                    hot_wallets: 3,
                },
                ExchangeSpec {
                    name: "Hydra".into(),
                    risk: Risk::High,
                    hot_wallets: 2,
                },
                ExchangeSpec {
                    name: "Garantex".into(),
                    risk: Risk::Sanctioned,
                    hot_wallets: 2,
                },
            ],
            unlabeled_cluster_size: 5,
            aliases: 12,
            wallets_per_alias: 2,
            expense_mix: [0.7, 0.05, 0.25],
            payroll_payments: 60,
            era_start: NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date"),
            era_end: NaiveDate::from_ymd_opt(2021, 12, 31).expect("valid date"),
            era_cutoff: default_era_cutoff(),
            era_boundary_plants: 10,
            leak_label_fraction: 0.1,
            crowdsourced_fraction: 0.3,
            chat_messages: 400,
            chat_decoys: 25,
        }
    }
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidConfig(msg.into())
}

fn check_weights(name: &str, w: &[f64]) -> Result<(), SynthError> {
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid(format!("{name}: weights must be finite and non-negative")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("{name}: weights sum to {sum}, expected 1")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml(s: &str) -> Result<Self, SynthError> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Ransom-address candidates: positives, near misses and noise.
    pub fn candidate_count(&self) -> usize {
        self.victims + self.near_miss.total() + self.noise_addresses
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        check_weights("split_weights", &self.split_weights)?;
        check_weights("expense_mix", &self.expense_mix)?;
        for (name, p) in [
            ("leak_label_fraction", self.leak_label_fraction),
            ("crowdsourced_fraction", self.crowdsourced_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} must lie in [0, 1]")));
            }
        }
        let (lo, hi) = self.ransom_btc;
        if !(lo.is_finite() && hi.is_finite() && 0.01 <= lo && lo <= hi && hi <= 10_000.0) {
            return Err(invalid("ransom_btc must satisfy 0.01 <= min <= max <= 10000"));
        }
        let (flo, fhi) = self.fee_sat_per_vb;
        if flo == 0 || flo > fhi || fhi > 1_000 {
            return Err(invalid("fee_sat_per_vb must satisfy 1 <= min <= max <= 1000"));
        }
        // The thinnest planted side (2.5% of the smallest ransom) must cover
        // a worst-case fee at every hop.
        if lo * 1e8 * 0.025 <= (fhi * 250 * 8) as f64 {
            return Err(invalid("ransom_btc minimum too small for the fee range"));
        }
        if self.era_start >= self.era_end {
            return Err(invalid("era_start must precede era_end"));
        }
        if self.max_chain == 0 || self.max_chain > 7 {
            return Err(invalid("max_chain must lie in 1..=7"));
        }
        if self.era_boundary_plants > self.victims {
            return Err(invalid("era_boundary_plants exceeds victims"));
        }
        let needs_payments = self.victims + self.near_miss.total() > 0;
        if needs_payments && !self.exchanges.iter().any(|e| e.risk == Risk::Low && e.hot_wallets > 0) {
            return Err(invalid("planted payments need a low-risk exchange with hot wallets"));
        }
        if needs_payments && self.aliases * self.wallets_per_alias == 0 {
            return Err(invalid("planted payments need leak wallets (aliases × wallets_per_alias > 0)"));
        }
        if self.payroll_payments + self.chat_messages > 0 && self.aliases == 0 {
            return Err(invalid("payroll and chat need at least one alias"));
        }
        if self.chat_messages > 0 && self.aliases < 2 {
            return Err(invalid("chat needs at least two aliases"));
        }
        let mut names: Vec<&str> = self.exchanges.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) || names.iter().any(|n| n.trim().is_empty()) {
            return Err(invalid("exchange names must be unique and non-empty"));
        }
        if names.contains(&crate::labels::UNLABELED_CLUSTER) {
            return Err(invalid("exchange name collides with the reserved unlabeled cluster name"));
        }
        Ok(())
    }

    /// Start and end instants of the era window (end exclusive).
    pub(crate) fn era_bounds(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        let start = Utc.from_utc_datetime(&self.era_start.and_hms_opt(0, 0, 0).expect("midnight"));
        let end = Utc.from_utc_datetime(&self.era_end.and_hms_opt(0, 0, 0).expect("midnight"))
            + chrono::Duration::days(1);
        (start, end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.candidate_count(), 1000);
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let cfg = ScenarioConfig::from_toml("seed = 9\nvictims = 3\nera_boundary_plants = 2\nnoise_addresses = 0\n").unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.victims, 3);
        assert_eq!(cfg.aliases, 12);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |s: &str| matches!(ScenarioConfig::from_toml(s), Err(SynthError::InvalidConfig(_)));
        assert!(bad("split_weights = [1.0, 1.0, 0, 0, 0, 0, 0, 0, 0, 0]"));
        assert!(bad("era_start = \"2022-01-01\""));
        assert!(bad("fee_sat_per_vb = [5, 1]"));
        assert!(bad("exchanges = []"));
        assert!(bad("unknown_field = 1"));
        assert!(bad("era_boundary_plants = 500"));
        assert!(bad("ransom_btc = [0.01, 1.0]\nfee_sat_per_vb = [1, 1000]"));
    }

    #[test]
    fn zero_victims_needs_nothing() {
        let cfg = ScenarioConfig::from_toml(
            "victims = 0\nnoise_addresses = 0\nera_boundary_plants = 0\nexchanges = []\n[near_miss]\n",
        )
        .unwrap();
        assert_eq!(cfg.candidate_count(), 0);
    }
}

//! Synthetic ransomware payment economies with known ground truth.

mod config;
mod generate;
mod manifest;
mod score;

use thiserror::Error;

pub use config::{ExchangeSpec, NearMissCounts, ScenarioConfig, SPLIT_GRID};
pub use generate::{generate, Scenario, SCENARIO_FILES};
pub use manifest::{
    usd_cents, ChatTruth, Criterion, GroundTruthManifest, LedgerCents, PlantKind, PlantedCandidate,
};
pub use score::{score, ScoreReport};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("verdicts do not match manifest: {0}")]
    ManifestMismatch(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Ledger(#[from] crate::ledger::LedgerError),
    #[error(transparent)]
    Labels(#[from] crate::labels::LabelError),
    #[error(transparent)]
    Valuation(#[from] crate::valuation::ValuationError),
    #[error(transparent)]
    Chat(#[from] crate::chat::ChatError),
}

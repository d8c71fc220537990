//! Detection machinery: payment splits, leak reachability, funding-source
//! attribution, the three-criterion ransom classifier and co-spend clusters.

mod attribution;
mod classify;
mod cluster;
mod reach;
mod split;

pub use attribution::{
    input_shares, source_attribution, AttributionMode, SourceAttribution, SourceKey, SourceShare,
};
pub use classify::{
    classify_all, classify_ransom, default_era_cutoff, read_verdicts, write_verdicts,
    DetectorParams, RansomVerdict, Strain, VerdictRow,
};
pub use cluster::{cospend_clusters, CoSpendClusters, DisjointSet};
pub use reach::{leak_path, reaches_leak, LeakHit};
pub use split::{detect_split, SplitEvent};

use thiserror::Error;

use crate::addr::Address;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("address {0} not in graph")]
    UnknownAddress(Address),
    #[error("address {0} has received nothing")]
    NothingReceived(Address),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown verdict value {0:?}")]
    BadVerdict(String),
}

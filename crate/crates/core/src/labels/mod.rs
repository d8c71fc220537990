//! Address annotations and entity attributions.

mod entity;
mod label;

pub use entity::{
    Bucket, EntityKey, EntityKind, EntityRecord, EntityResolver, EntityStore, Risk,
    UNLABELED_CLUSTER,
};
pub use label::{append_to_log, Category, LabelRecord, LabelSource, LabelStore};

use thiserror::Error;

use crate::addr::Address;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: invalid address row: {reason}")]
    InvalidAddressRow { line: u64, reason: String },
    #[error("line {line}: unknown category {value:?}")]
    UnknownCategory { line: u64, value: String },
    #[error("line {line}: unknown source {value:?}")]
    UnknownSource { line: u64, value: String },
    #[error("line {line}: unknown entity kind {value:?}")]
    UnknownKind { line: u64, value: String },
    #[error("line {line}: unknown risk tier {value:?}")]
    UnknownRisk { line: u64, value: String },
    #[error("exchange {0:?} has no risk tier")]
    MissingRisk(String),
    #[error("two names for the unlabeled cluster: {0:?} and {1:?}")]
    MultipleUnlabeledNames(String, String),
    #[error("duplicate entity key {0}")]
    DuplicateEntityKey(String),
    #[error("derived label for {0} has no run id")]
    MissingProvenance(Address),
}

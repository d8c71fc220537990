//! Chat-corpus analytics: loading, degree-centrality ranking, annotation
//! worksheets and inter-annotator agreement.

mod centrality;
mod corpus;
mod kappa;
mod worksheet;

pub use centrality::{degree_centrality, AliasDegree};
pub use corpus::{ChatMessage, ConversationKey, Corpus, Server};
pub use kappa::{fleiss_kappa, AgreementMatrix};
pub use worksheet::{sample_for_annotation, Worksheet, WorksheetRow};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("sample of {requested} exceeds {available} candidates")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("agreement needs at least 2 raters, got {0}")]
    TooFewRaters(usize),
    #[error("item {item} has {got} ratings, expected {expected}")]
    RowSum { item: usize, got: u64, expected: u64 },
    #[error("agreement matrix has no items")]
    EmptyMatrix,
    #[error("expected agreement is 1 but observed agreement is {observed}")]
    DegenerateAgreement { observed: f64 },
    #[error("worksheet item {0:?} is not rated in every worksheet")]
    UnmatchedItem(String),
}

//! Ransomware payment tracing over Bitcoin transaction graphs.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`addr`]: address validation and extraction from chat text
//! - [`chat`]: corpus loading, degree centrality, annotation worksheets, Fleiss' kappa
//! - [`ledger`]: transaction graph, ingest format, caching fetch client
//! - [`valuation`]: USD at the daily close
//! - [`labels`]: address annotations and entity attributions
//! - [`heuristics`]: split detection, reachability, attribution, clustering
//! - [`econ`]: income/expense, origin, alias and flow reports
//! - [`synth`]: synthetic economies with ground-truth manifests
//! - [`cli`]: the command-line front end

pub mod addr;
pub mod chat;
pub mod cli;
pub mod econ;
pub(crate) mod fsutil;
pub mod heuristics;
pub mod labels;
pub mod ledger;
pub mod synth;
pub mod valuation;

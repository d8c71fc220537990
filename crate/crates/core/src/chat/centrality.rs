use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{ChatMessage, Server};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AliasDegree {
    pub alias: String,
    pub degree: u64,
}

/// Message-count degree per alias (sent + received), ranked separately for
/// each server: degree descending, then alias ascending.
pub fn degree_centrality(messages: &[ChatMessage]) -> BTreeMap<Server, Vec<AliasDegree>> {
    let mut counts: BTreeMap<Server, HashMap<&str, u64>> = BTreeMap::new();
    for m in messages {
        let per = counts.entry(m.server).or_default();
        *per.entry(&m.from_alias).or_default() += 1;
        *per.entry(&m.to_alias).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(server, per)| {
            let mut ranked: Vec<AliasDegree> = per
                .into_iter()
                .map(|(alias, degree)| AliasDegree {
                    alias: alias.to_string(),
                    degree,
                })
                .collect();
            ranked.sort_by(|x, y| y.degree.cmp(&x.degree).then_with(|| x.alias.cmp(&y.alias)));
            (server, ranked)
        })
        .collect()
}

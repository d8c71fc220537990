use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::{base58, bech32, validate, Address, ValidationFailure};
use crate::chat::{ChatMessage, ConversationKey};

/// Messages kept on each side of a hit when building its context window.
pub const CONTEXT_RADIUS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub message_id: u64,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateAddress {
    pub raw_text: String,
    pub span: Span,
    /// Up to `CONTEXT_RADIUS` messages before and after the hit, plus the hit
    /// itself, never crossing a conversation boundary.
    pub context: Vec<ChatMessage>,
}

impl CandidateAddress {
    /// Stable identifier used in worksheets: `<message id>:<byte offset>`.
    pub fn id(&self) -> String {
        format!("{}:{}", self.span.message_id, self.span.start)
    }
}

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z0-9]+").expect("static regex"))
}

/// Grammar test on a maximal alphanumeric token. Checksums are left to
/// [`validate`].
fn matches_grammar(token: &str) -> bool {
    let b = token.as_bytes();
    if b.len() >= 3 && token[..3].eq_ignore_ascii_case("bc1") {
        let rest = &b[3..];
        return (14..=74).contains(&rest.len()) && rest.iter().all(|&c| bech32::is_bech32_char(c));
    }
    matches!(b.first(), Some(b'1' | b'3'))
        && (26..=35).contains(&b.len())
        && b.iter().all(|&c| base58::is_base58_char(c))
}

/// Scans every message body for address-shaped tokens and attaches a
/// context window to each hit. Output follows corpus order, then offset.
pub fn extract_candidates(corpus: &[ChatMessage]) -> Vec<CandidateAddress> {
    let mut conversations: HashMap<ConversationKey, Vec<usize>> = HashMap::new();
    let mut position = Vec::with_capacity(corpus.len());
    for (i, m) in corpus.iter().enumerate() {
        let members = conversations.entry(m.conversation()).or_default();
        position.push(members.len());
        members.push(i);
    }

    let mut out = Vec::new();
    for (i, msg) in corpus.iter().enumerate() {
        for tok in token_re().find_iter(&msg.body) {
            if !matches_grammar(tok.as_str()) {
                continue;
            }
            let members = &conversations[&msg.conversation()];
            let at = position[i];
            let lo = at.saturating_sub(CONTEXT_RADIUS);
            let hi = (at + CONTEXT_RADIUS + 1).min(members.len());
            out.push(CandidateAddress {
                raw_text: tok.as_str().to_string(),
                span: Span {
                    message_id: msg.id,
                    start: tok.start(),
                    end: tok.end(),
                },
                context: members[lo..hi].iter().map(|&j| corpus[j].clone()).collect(),
            });
        }
    }
    out
}

pub type Accepted = Vec<(Address, CandidateAddress)>;
pub type Rejected = Vec<(CandidateAddress, ValidationFailure)>;

/// Validates every candidate, separating accepted from rejected.
pub fn split_valid(candidates: Vec<CandidateAddress>) -> (Accepted, Rejected) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for c in candidates {
        match validate(&c.raw_text) {
            Ok(a) => ok.push((a, c)),
            Err(e) => bad.push((c, e)),
        }
    }
    (ok, bad)
}

/// Groups validated mentions by canonical address, keeping mention order.
pub fn dedupe(
    validated: impl IntoIterator<Item = (Address, CandidateAddress)>,
) -> BTreeMap<Address, Vec<CandidateAddress>> {
    let mut groups: BTreeMap<Address, Vec<CandidateAddress>> = BTreeMap::new();
    for (a, c) in validated {
        groups.entry(a).or_default().push(c);
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MentionCounts {
    pub unique_addresses: usize,
    pub mentions: usize,
}

impl MentionCounts {
    pub fn of(groups: &BTreeMap<Address, Vec<CandidateAddress>>) -> Self {
        MentionCounts {
            unique_addresses: groups.len(),
            mentions: groups.values().map(Vec::len).sum(),
        }
    }
}

/// Writes the candidate report: `address,message_id,start,end`.
pub fn candidate_report<W: std::io::Write>(
    w: W,
    groups: &BTreeMap<Address, Vec<CandidateAddress>>,
) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["address", "message_id", "start", "end"])?;
    for (a, mentions) in groups {
        for c in mentions {
            wtr.write_record([
                a.as_str(),
                &c.span.message_id.to_string(),
                &c.span.start.to_string(),
                &c.span.end.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

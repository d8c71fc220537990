use std::fmt;
use std::io::BufRead;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ChatError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Server {
    #[default]
    Jabber,
    #[serde(alias = "rocket.chat", alias = "rocket_chat")]
    RocketChat,
}

impl fmt::Display for Server {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Server::Jabber => "jabber",
            Server::RocketChat => "rocketchat",
        })
    }
}

/// One delivered chat message. `id` is the record's position in the input
/// stream and stays stable across re-sorting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatMessage {
    pub id: u64,
    pub ts: DateTime<Utc>,
    pub from_alias: String,
    pub to_alias: String,
    pub body: String,
    pub server: Server,
}

/// Conversation key: unordered alias pair on one server. For group channels
/// `to_alias` is the channel name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConversationKey {
    pub server: Server,
    pub a: String,
    pub b: String,
}

impl ChatMessage {
    pub fn conversation(&self) -> ConversationKey {
        let (a, b) = if self.from_alias <= self.to_alias {
            (&self.from_alias, &self.to_alias)
        } else {
            (&self.to_alias, &self.from_alias)
        };
        ConversationKey {
            server: self.server,
            a: a.clone(),
            b: b.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawMessage {
    ts: DateTime<Utc>,
    from: String,
    to: String,
    body: String,
    #[serde(default)]
    server: Server,
}

/// A chat corpus sorted by `(ts, id)`.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    messages: Vec<ChatMessage>,
}

impl Corpus {
    pub fn new(mut messages: Vec<ChatMessage>) -> Self {
        messages.sort_by(|x, y| x.ts.cmp(&y.ts).then(x.id.cmp(&y.id)));
        Corpus { messages }
    }

    /// Parses line-delimited JSON records `{ts, from, to, body[, server]}`.
    /// Blank lines are skipped; ids continue from `first_id`.
    pub fn read_jsonl<R: BufRead>(reader: R, first_id: u64) -> Result<Vec<ChatMessage>, ChatError> {
        let mut out = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let raw: RawMessage = serde_json::from_str(&line).map_err(|e| ChatError::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            if raw.from.is_empty() || raw.to.is_empty() {
                return Err(ChatError::Parse {
                    line: lineno,
                    reason: "empty alias".into(),
                });
            }
            out.push(ChatMessage {
                id: first_id + out.len() as u64,
                ts: raw.ts,
                from_alias: raw.from,
                to_alias: raw.to,
                body: raw.body,
                server: raw.server,
            });
        }
        Ok(out)
    }

    pub fn load_files<P: AsRef<std::path::Path>>(paths: &[P]) -> Result<Self, ChatError> {
        let mut all = Vec::new();
        for p in paths {
            let f = std::fs::File::open(p.as_ref())?;
            let next = all.len() as u64;
            all.extend(Self::read_jsonl(std::io::BufReader::new(f), next)?);
        }
        Ok(Corpus::new(all))
    }

    /// Writes messages in the format `read_jsonl` accepts.
    pub fn write_jsonl<W: std::io::Write>(mut w: W, messages: &[ChatMessage]) -> Result<(), ChatError> {
        for m in messages {
            let raw = RawMessage {
                ts: m.ts,
                from: m.from_alias.clone(),
                to: m.to_alias.clone(),
                body: m.body.clone(),
                server: m.server,
            };
            let line = serde_json::to_string(&raw).map_err(|e| ChatError::Parse {
                line: m.id as usize,
                reason: e.to_string(),
            })?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn messages(&self) -> &[ChatMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

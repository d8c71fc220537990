//! Pull address candidates out of chat messages, validate and deduplicate.

use chrono::{TimeZone, Utc};
use ransomtrace::addr::{dedupe, extract_candidates, split_valid, MentionCounts};
use ransomtrace::chat::{ChatMessage, Server};

fn main() {
    let bodies = [
        ("target", "stern", "send salary to bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4 pls"),
        ("stern", "target", "ok"),
        ("target", "stern", "also the vpn bill, 3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy"),
        ("stern", "target", "typo? 3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLz"),
        ("target", "stern", "right one: 3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy"),
    ];
    let messages: Vec<ChatMessage> = bodies
        .iter()
        .enumerate()
        .map(|(i, (from, to, body))| ChatMessage {
            id: i as u64,
            ts: Utc.with_ymd_and_hms(2021, 5, 3, 9, i as u32, 0).unwrap(),
            from_alias: from.to_string(),
            to_alias: to.to_string(),
            body: body.to_string(),
            server: Server::Jabber,
        })
        .collect();

    let candidates = extract_candidates(&messages);
    println!("{} candidates", candidates.len());
    let (valid, rejected) = split_valid(candidates);
    for (c, why) in &rejected {
        println!("rejected {} at message {}: {}", c.raw_text, c.span.message_id, why.rule());
    }
    let groups = dedupe(valid);
    for (a, mentions) in &groups {
        let ids: Vec<String> = mentions.iter().map(|c| c.id()).collect();
        println!("{a}: mentioned at {}", ids.join(", "));
    }
    let counts = MentionCounts::of(&groups);
    println!("{} unique addresses, {} mentions", counts.unique_addresses, counts.mentions);
}

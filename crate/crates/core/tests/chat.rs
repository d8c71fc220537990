use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ransomtrace::addr::{extract_candidates, split_valid, CONTEXT_RADIUS};
use ransomtrace::chat::*;

fn msg(id: u64, from: &str, to: &str, body: &str) -> ChatMessage {
    ChatMessage {
        id,
        ts: Utc.timestamp_opt(1_600_000_000 + id as i64 * 60, 0).unwrap(),
        from_alias: from.into(),
        to_alias: to.into(),
        body: body.into(),
        server: Server::Jabber,
    }
}

/// Textbook kappa computed from per-item label lists.
fn kappa_oracle(items: &[Vec<usize>], categories: usize) -> f64 {
    let n = items[0].len() as f64;
    let big_n = items.len() as f64;
    let mut p_j = vec![0.0; categories];
    let mut p_bar = 0.0;
    for item in items {
        let mut counts = vec![0.0; categories];
        for &c in item {
            counts[c] += 1.0;
            p_j[c] += 1.0;
        }
        p_bar += (counts.iter().map(|x| x * x).sum::<f64>() - n) / (n * (n - 1.0));
    }
    p_bar /= big_n;
    let p_e: f64 = p_j.iter().map(|t| (t / (big_n * n)).powi(2)).sum();
    (p_bar - p_e) / (1.0 - p_e)
}

fn to_matrix(items: &[Vec<usize>], categories: usize) -> AgreementMatrix {
    let rows = items
        .iter()
        .map(|item| {
            let mut row = vec![0u64; categories];
            for &c in item {
                row[c] += 1;
            }
            row
        })
        .collect();
    AgreementMatrix::new(rows, items[0].len() as u64).unwrap()
}

#[test]
fn perfect_agreement_matrix() {
    let items: Vec<Vec<usize>> = (0..40).map(|i| vec![i % 4; 5]).collect();
    assert_eq!(fleiss_kappa(&to_matrix(&items, 4)).unwrap(), 1.0);
}

#[test]
fn five_item_matrix_matches_manual_value() {
    let m = AgreementMatrix::new(vec![vec![3, 0], vec![0, 3], vec![2, 1], vec![1, 2], vec![3, 0]], 3).unwrap();
    assert!((fleiss_kappa(&m).unwrap() - 4.0 / 9.0).abs() < 1e-9);
}

#[test]
fn uniform_random_ratings_have_no_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(2022);
    let items: Vec<Vec<usize>> = (0..20_000).map(|_| (0..4).map(|_| rng.random_range(0..5)).collect()).collect();
    let k = fleiss_kappa(&to_matrix(&items, 5)).unwrap();
    assert!(k.abs() < 0.05, "kappa {k}");
}

#[test]
fn row_sums_are_enforced() {
    assert!(AgreementMatrix::new(vec![vec![2, 0], vec![1, 0]], 2).is_err());
    assert!(AgreementMatrix::new(vec![vec![1, 0]], 1).is_err());
}

proptest! {
    #[test]
    fn kappa_matches_textbook_formula(items in prop::collection::vec(prop::collection::vec(0usize..3, 4), 2..30)) {
        let used = items.iter().flatten().collect::<std::collections::BTreeSet<_>>().len();
        prop_assume!(used > 1);
        let k = fleiss_kappa(&to_matrix(&items, 3)).unwrap();
        prop_assert!((k - kappa_oracle(&items, 3)).abs() < 1e-9);
    }

    #[test]
    fn kappa_invariant_under_item_and_category_permutation(
        items in prop::collection::vec(prop::collection::vec(0usize..4, 3), 2..25),
        rotate in 0usize..25,
        relabel in Just([2usize, 0, 3, 1]),
    ) {
        let used = items.iter().flatten().collect::<std::collections::BTreeSet<_>>().len();
        prop_assume!(used > 1);
        let base = fleiss_kappa(&to_matrix(&items, 4)).unwrap();
        let mut shuffled = items.clone();
        shuffled.rotate_left(rotate % items.len());
        for item in &mut shuffled {
            for c in item.iter_mut() {
                *c = relabel[*c];
            }
        }
        let other = fleiss_kappa(&to_matrix(&shuffled, 4)).unwrap();
        prop_assert!((base - other).abs() < 1e-12);
    }

    #[test]
    fn spans_lie_inside_bodies(bodies in prop::collection::vec("[a-zA-Z0-9 ,:é]{0,60}", 1..30), plant in any::<bool>()) {
        let mut msgs: Vec<ChatMessage> = bodies
            .iter()
            .enumerate()
            .map(|(i, b)| msg(i as u64, if i % 2 == 0 { "a" } else { "b" }, if i % 2 == 0 { "b" } else { "a" }, b))
            .collect();
        if plant {
            msgs.push(msg(999, "a", "b", "send to 1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa now"));
        }
        let found = extract_candidates(&msgs);
        for c in &found {
            let m = msgs.iter().find(|m| m.id == c.span.message_id).unwrap();
            prop_assert!(c.span.end <= m.body.len());
            prop_assert_eq!(&m.body[c.span.start..c.span.end], c.raw_text.as_str());
            prop_assert!(c.context.len() <= 2 * CONTEXT_RADIUS + 1);
        }
        let (ok, _) = split_valid(found);
        prop_assert_eq!(ok.len(), usize::from(plant));
    }
}

#[test]
fn context_is_capped_at_twenty_one_messages() {
    let mut msgs: Vec<ChatMessage> = (0..50).map(|i| msg(i, "x", "y", "hello")).collect();
    msgs[25].body = "pay bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4".into();
    let found = extract_candidates(&msgs);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].context.len(), 21);
    assert_eq!(found[0].context[10].id, 25);
}

#[test]
fn centrality_ranks_hub_first() {
    let mut msgs = Vec::new();
    for i in 0..30 {
        msgs.push(msg(i, "boss", &format!("m{}", i % 5), "ok"));
    }
    msgs.push(msg(100, "m1", "m2", "hi"));
    let ranked = degree_centrality(&msgs);
    let jabber = &ranked[&Server::Jabber];
    assert_eq!(jabber[0].alias, "boss");
    assert_eq!(jabber[0].degree, 30);
}

#[test]
fn sampling_is_seeded() {
    let msgs: Vec<ChatMessage> = (0..40)
        .map(|i| {
            let a = ransomtrace::addr::Address::from_payload(ransomtrace::addr::ScriptKind::P2PKH, &[i as u8; 20]).unwrap();
            msg(i, "a", "b", &format!("wallet {a}"))
        })
        .collect();
    let cands = extract_candidates(&msgs);
    let one = sample_for_annotation(&cands, 10, 5).unwrap();
    let two = sample_for_annotation(&cands, 10, 5).unwrap();
    let other = sample_for_annotation(&cands, 10, 6).unwrap();
    assert_eq!(one, two);
    assert_ne!(one, other);
    assert!(sample_for_annotation(&cands, 41, 5).is_err());

    let mut a = one.clone();
    let mut b = one.clone();
    for (i, (x, y)) in a.rows.iter_mut().zip(b.rows.iter_mut()).enumerate() {
        x.category = "salary".into();
        y.category = if i < 8 { "salary" } else { "other" }.into();
    }
    let m = Worksheet::agreement(&[a, b]).unwrap();
    assert_eq!(m.items(), 10);
    assert!(fleiss_kappa(&m).unwrap() < 1.0);
}

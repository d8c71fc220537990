use std::collections::BTreeMap;

use super::HeuristicError;
use crate::addr::Address;
use crate::ledger::{TxGraph, Txid};

/// Received funds divided between exactly two destinations at (close to) a
/// multiple of five percent.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvent {
    pub address: Address,
    pub spend_txid: Txid,
    pub small_sats: u64,
    pub large_sats: u64,
    /// `small / (small + large)`, in (0, 0.5].
    pub fraction_small: f64,
    pub matched_percent: u8,
    /// Distance from `fraction_small` to `matched_percent`, in percentage points.
    pub residual_pp: f64,
    /// (small side, large side); equal halves are ordered by address.
    pub destinations: (Address, Address),
}

/// Looks at the first transaction spending from `a`. Outputs back to `a` are
/// change and ignored; the rest must go to exactly two distinct addresses,
/// and the smaller share must be within `tol_pp` of 5, 10, ..., 50 percent.
pub fn detect_split(a: &Address, g: &TxGraph, tol_pp: f64) -> Result<Option<SplitEvent>, HeuristicError> {
    if !g.contains(a) {
        return Err(HeuristicError::UnknownAddress(a.clone()));
    }
    let Some(spend) = g.spending_txs(a).next() else {
        return Ok(None);
    };
    let mut dest: BTreeMap<&Address, u64> = BTreeMap::new();
    for s in spend.outputs.iter().filter(|s| &s.address != a) {
        *dest.entry(&s.address).or_default() += s.value_sats;
    }
    if dest.len() != 2 {
        return Ok(None);
    }
    let mut sides: Vec<(&Address, u64)> = dest.into_iter().collect();
    // Stable sort keeps address order for equal values.
    sides.sort_by_key(|&(_, v)| v);
    let (small_addr, small) = sides[0];
    let (large_addr, large) = sides[1];
    if small == 0 {
        return Ok(None);
    }
    let total = small as u128 + large as u128;
    let small128 = small as u128;
    // Nearest multiple of 5%: round(small * 20 / total).
    let steps = (small128 * 40 + total) / (2 * total);
    if !(1..=10).contains(&steps) {
        return Ok(None);
    }
    let percent = (steps * 5) as u8;
    let target = percent as u128 * total;
    let scaled = small128 * 100;
    let diff = scaled.abs_diff(target);
    let residual_pp = diff as f64 / total as f64;
    if residual_pp > tol_pp {
        return Ok(None);
    }
    Ok(Some(SplitEvent {
        address: a.clone(),
        spend_txid: spend.txid,
        small_sats: small,
        large_sats: large,
        fraction_small: small as f64 / total as f64,
        matched_percent: percent,
        residual_pp,
        destinations: (small_addr.clone(), large_addr.clone()),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::ScriptKind;
    use crate::ledger::{Transaction, TxSlot, SATS_PER_BTC};

    fn addr(n: u8) -> Address {
        Address::from_payload(ScriptKind::P2WPKH, &[n; 20]).unwrap()
    }

    fn graph(outs: &[(u8, u64)]) -> TxGraph {
        let total: u64 = outs.iter().map(|o| o.1).sum();
        let fund = Transaction {
            txid: Txid([1; 32]),
            timestamp: chrono::DateTime::from_timestamp(100, 0).unwrap(),
            inputs: vec![],
            outputs: vec![TxSlot::new(addr(1), total + 1000)],
            fee_sats: 0,
        };
        let spend = Transaction {
            txid: Txid([2; 32]),
            timestamp: chrono::DateTime::from_timestamp(200, 0).unwrap(),
            inputs: vec![TxSlot::new(addr(1), total + 1000)],
            outputs: outs.iter().map(|&(a, v)| TxSlot::new(addr(a), v)).collect(),
            fee_sats: 1000,
        };
        TxGraph::ingest([fund, spend]).unwrap()
    }

    #[test]
    fn twenty_five_seventy_five() {
        let g = graph(&[(2, 55 * SATS_PER_BTC / 10), (3, 165 * SATS_PER_BTC / 10)]);
        let e = detect_split(&addr(1), &g, 0.5).unwrap().unwrap();
        assert_eq!(e.matched_percent, 25);
        assert_eq!(e.residual_pp, 0.0);
        assert_eq!(e.destinations, (addr(2), addr(3)));
    }

    #[test]
    fn single_output_is_not_a_split() {
        let g = graph(&[(2, SATS_PER_BTC)]);
        assert!(detect_split(&addr(1), &g, 0.5).unwrap().is_none());
    }

    #[test]
    fn change_back_to_source_is_ignored() {
        let g = graph(&[(2, 20), (1, 500), (3, 80)]);
        let e = detect_split(&addr(1), &g, 0.5).unwrap().unwrap();
        assert_eq!(e.matched_percent, 20);
    }

    #[test]
    fn three_destinations_rejected() {
        let g = graph(&[(2, 20), (3, 40), (4, 40)]);
        assert!(detect_split(&addr(1), &g, 0.5).unwrap().is_none());
    }

    #[test]
    fn tolerance_boundary() {
        // 20.4% small side: residual 0.4 pp.
        let g = graph(&[(2, 204), (3, 796)]);
        let e = detect_split(&addr(1), &g, 0.5).unwrap().unwrap();
        assert_eq!(e.matched_percent, 20);
        assert!((e.residual_pp - 0.4).abs() < 1e-12);
        assert!(detect_split(&addr(1), &g, 0.3).unwrap().is_none());
        // 22.5% is equidistant-ish from grid: residual 2.5 pp.
        let g = graph(&[(2, 225), (3, 775)]);
        assert!(detect_split(&addr(1), &g, 0.5).unwrap().is_none());
        // 1% rounds to 0% which is not a valid split.
        let g = graph(&[(2, 1), (3, 99)]);
        assert!(detect_split(&addr(1), &g, 5.0).unwrap().is_none());
    }

    #[test]
    fn even_split_is_fifty() {
        let g = graph(&[(3, 500), (2, 500)]);
        let e = detect_split(&addr(1), &g, 0.0).unwrap().unwrap();
        assert_eq!(e.matched_percent, 50);
        assert_eq!(e.destinations, (addr(2), addr(3)));
    }

    #[test]
    fn no_spend_and_unknown() {
        let g = graph(&[(2, 20), (3, 80)]);
        assert!(detect_split(&addr(2), &g, 0.5).unwrap().is_none());
        assert!(matches!(detect_split(&addr(9), &g, 0.5), Err(HeuristicError::UnknownAddress(_))));
    }
}

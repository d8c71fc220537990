use chrono::{Duration, NaiveDate, TimeZone, Utc};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ransomtrace::valuation::*;
use rust_decimal::Decimal;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).unwrap()
}

/// 3 years of closes in whole cents, from a seeded walk.
fn fixture(seed: u64) -> (RateTable, Vec<i128>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cents = 350_000i128;
    let mut all = Vec::new();
    for _ in 0..1096 {
        cents = (cents + rng.random_range(-40_000..=40_000)).clamp(300_000, 6_800_000);
        all.push(cents);
    }
    let rows = all
        .iter()
        .enumerate()
        .map(|(i, &c)| (start() + Duration::days(i as i64), Decimal::new(c as i64, 2)));
    (RateTable::from_rows(rows).unwrap(), all)
}

/// Half-even rounding of `sats * cents / 1e8` in integers.
fn oracle_cents(sats: u64, rate_cents: i128) -> i128 {
    let num = sats as i128 * rate_cents;
    let (q, r) = (num / 100_000_000, num % 100_000_000);
    match (r * 2).cmp(&100_000_000) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    }
}

#[test]
fn thousand_random_pairs_match_integer_oracle() {
    let (table, cents) = fixture(11);
    let v = Valuer::new(&table, GapPolicy::Strict);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1_000 {
        let day = rng.random_range(0..cents.len());
        let sats = rng.random_range(0..=10_000 * 100_000_000u64);
        let t = Utc.from_utc_datetime(&(start() + Duration::days(day as i64)).and_hms_opt(rng.random_range(0..24), 30, 0).unwrap());
        let got = v.usd_value(sats, t).unwrap();
        let expected = Decimal::new(oracle_cents(sats, cents[day]) as i64, 2);
        assert!((got - expected).abs() <= Decimal::new(1, 2), "{sats} sats on day {day}: {got} vs {expected}");
        assert_eq!(got, expected);
    }
}

#[test]
fn twenty_two_btc_at_fixture_close() {
    let table = RateTable::from_rows([(start(), Decimal::new(4_350_000, 2))]).unwrap();
    let t = Utc.with_ymd_and_hms(2019, 1, 1, 18, 0, 0).unwrap();
    let usd = Valuer::new(&table, GapPolicy::Strict).usd_value(22 * 100_000_000, t).unwrap();
    assert_eq!(format_usd(usd), "957000.00");
}

#[test]
fn gaps_follow_policy() {
    let d2 = start() + Duration::days(2);
    let table = RateTable::from_rows([(start(), Decimal::from(100)), (d2, Decimal::from(300))]).unwrap();
    assert_eq!(table.gaps(), vec![start() + Duration::days(1)]);
    let t = Utc.from_utc_datetime(&(start() + Duration::days(1)).and_hms_opt(1, 0, 0).unwrap());
    assert!(matches!(Valuer::new(&table, GapPolicy::Strict).usd_value(1, t), Err(ValuationError::MissingRate(_))));
    assert_eq!(Valuer::new(&table, GapPolicy::Carry).usd_value(100_000_000, t).unwrap(), Decimal::from(100));
    let before = Utc.with_ymd_and_hms(2018, 12, 31, 0, 0, 0).unwrap();
    assert!(Valuer::new(&table, GapPolicy::Carry).usd_value(1, before).is_err());
}

#[test]
fn table_round_trips_through_csv() {
    let (table, _) = fixture(3);
    let mut buf = Vec::new();
    table.write(&mut buf).unwrap();
    assert_eq!(RateTable::load(buf.as_slice()).unwrap(), table);
    let dup = "date,close_usd\n2020-01-01,1.00\n2020-01-01,2.00\n";
    assert!(matches!(RateTable::load(dup.as_bytes()), Err(ValuationError::DuplicateDate(_))));
    let neg = "date,close_usd\n2020-01-01,0\n";
    assert!(matches!(RateTable::load(neg.as_bytes()), Err(ValuationError::NonPositiveRate(_))));
}

proptest! {
    #[test]
    fn exact_value_is_linear(a in 0u64..2_100_000_000_000_000, b in 0u64..2_100_000_000_000_000, day in 0i64..1096) {
        let (table, _) = fixture(5);
        let v = Valuer::new(&table, GapPolicy::Strict);
        let t = Utc.from_utc_datetime(&(start() + Duration::days(day)).and_hms_opt(12, 0, 0).unwrap());
        let sum = v.usd_exact(a + b, t).unwrap();
        prop_assert_eq!(sum, v.usd_exact(a, t).unwrap() + v.usd_exact(b, t).unwrap());
        let rounded = v.usd_value(a, t).unwrap() + v.usd_value(b, t).unwrap();
        prop_assert!((v.usd_value(a + b, t).unwrap() - rounded).abs() <= Decimal::new(1, 2));
    }

    #[test]
    fn value_is_monotone_in_amount(a in 0u64..100_000_000_000, extra in 0u64..100_000_000_000, day in 0i64..1096) {
        let (table, _) = fixture(5);
        let v = Valuer::new(&table, GapPolicy::Strict);
        let t = Utc.from_utc_datetime(&(start() + Duration::days(day)).and_hms_opt(0, 0, 0).unwrap());
        prop_assert!(v.usd_value(a, t).unwrap() <= v.usd_value(a + extra, t).unwrap());
    }
}

//! USD valuation of satoshi amounts at the daily BTC/USD close.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use rust_decimal::{Decimal, RoundingStrategy};
use thiserror::Error;

use crate::ledger::SATS_PER_BTC;

#[derive(Debug, Error)]
pub enum ValuationError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate rate for {0}")]
    DuplicateDate(NaiveDate),
    #[error("non-positive rate on {0}")]
    NonPositiveRate(NaiveDate),
    #[error("line {line}: {reason}")]
    UnparseableRow { line: u64, reason: String },
    #[error("no closing rate for {0}")]
    MissingRate(NaiveDate),
}

/// What to do when a transaction date has no closing rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Fail with `MissingRate`.
    #[default]
    Strict,
    /// Use the most recent earlier close.
    Carry,
}

impl FromStr for GapPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(GapPolicy::Strict),
            "carry" => Ok(GapPolicy::Carry),
            other => Err(format!("unknown gap policy {other:?} (expected strict|carry)")),
        }
    }
}

impl fmt::Display for GapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapPolicy::Strict => "strict",
            GapPolicy::Carry => "carry",
        })
    }
}

/// Daily close in USD per BTC, keyed by calendar date.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RateTable {
    rates: BTreeMap<NaiveDate, Decimal>,
}

impl RateTable {
    pub fn from_rows<I>(rows: I) -> Result<Self, ValuationError>
    where
        I: IntoIterator<Item = (NaiveDate, Decimal)>,
    {
        let mut rates = BTreeMap::new();
        for (date, rate) in rows {
            if rate <= Decimal::ZERO {
                return Err(ValuationError::NonPositiveRate(date));
            }
            if rates.insert(date, rate).is_some() {
                return Err(ValuationError::DuplicateDate(date));
            }
        }
        Ok(RateTable { rates })
    }

    /// Reads `date,close_usd` rows (ISO dates, decimal rates) after a header.
    pub fn load<R: Read>(r: R) -> Result<Self, ValuationError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "close_usd" {
            return Err(ValuationError::UnparseableRow {
                line: 1,
                reason: "expected header `date,close_usd`".into(),
            });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |reason: String| ValuationError::UnparseableRow { line, reason };
            if rec.len() != 2 {
                return Err(bad(format!("expected 2 fields, got {}", rec.len())));
            }
            let date = NaiveDate::parse_from_str(rec[0].trim(), "%Y-%m-%d")
                .map_err(|e| bad(format!("date {:?}: {e}", &rec[0])))?;
            let rate = Decimal::from_str(rec[1].trim())
                .map_err(|e| bad(format!("rate {:?}: {e}", &rec[1])))?;
            rows.push((date, rate));
        }
        RateTable::from_rows(rows)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), ValuationError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["date", "close_usd"])?;
        for (d, r) in &self.rates {
            wtr.write_record([d.format("%Y-%m-%d").to_string(), r.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rates.keys().next().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rates.keys().next_back().copied()
    }

    pub fn get(&self, d: NaiveDate) -> Option<Decimal> {
        self.rates.get(&d).copied()
    }

    /// Dates between the first and last entry that have no rate.
    pub fn gaps(&self) -> Vec<NaiveDate> {
        let (Some(first), Some(last)) = (self.first_date(), self.last_date()) else {
            return Vec::new();
        };
        first
            .iter_days()
            .take_while(|d| *d <= last)
            .filter(|d| !self.rates.contains_key(d))
            .collect()
    }

    fn resolve(&self, d: NaiveDate, policy: GapPolicy) -> Result<Decimal, ValuationError> {
        if let Some(r) = self.rates.get(&d) {
            return Ok(*r);
        }
        match policy {
            GapPolicy::Strict => Err(ValuationError::MissingRate(d)),
            GapPolicy::Carry => self
                .rates
                .range(..d)
                .next_back()
                .map(|(_, r)| *r)
                .ok_or(ValuationError::MissingRate(d)),
        }
    }
}

/// Converts amounts using a rate table, a gap policy and the offset that
/// decides which calendar day an instant falls on (UTC by default).
#[derive(Debug, Clone, Copy)]
pub struct Valuer<'a> {
    table: &'a RateTable,
    policy: GapPolicy,
    day_offset: FixedOffset,
}

impl<'a> Valuer<'a> {
    pub fn new(table: &'a RateTable, policy: GapPolicy) -> Self {
        Valuer {
            table,
            policy,
            day_offset: FixedOffset::east_opt(0).expect("zero offset"),
        }
    }

    pub fn with_day_offset(mut self, offset: FixedOffset) -> Self {
        self.day_offset = offset;
        self
    }

    pub fn date_of(&self, t: DateTime<Utc>) -> NaiveDate {
        t.with_timezone(&self.day_offset).date_naive()
    }

    pub fn rate_at(&self, t: DateTime<Utc>) -> Result<Decimal, ValuationError> {
        self.table.resolve(self.date_of(t), self.policy)
    }

    /// Unrounded `sats / 1e8 × close`.
    pub fn usd_exact(&self, amount_sats: u64, t: DateTime<Utc>) -> Result<Decimal, ValuationError> {
        let rate = self.rate_at(t)?;
        Ok(Decimal::from(amount_sats) * rate / Decimal::from(SATS_PER_BTC))
    }

    /// `sats / 1e8 × close`, rounded half-even to cents.
    pub fn usd_value(&self, amount_sats: u64, t: DateTime<Utc>) -> Result<Decimal, ValuationError> {
        Ok(round_cents(self.usd_exact(amount_sats, t)?))
    }
}

pub fn round_cents(d: Decimal) -> Decimal {
    d.round_dp_with_strategy(2, RoundingStrategy::MidpointNearestEven)
}

/// Renders a USD amount with exactly two fractional digits.
pub fn format_usd(d: Decimal) -> String {
    format!("{:.2}", round_cents(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rust_decimal::prelude::FromPrimitive;

    fn table(rows: &[(&str, &str)]) -> RateTable {
        RateTable::from_rows(rows.iter().map(|(d, r)| {
            (NaiveDate::parse_from_str(d, "%Y-%m-%d").unwrap(), Decimal::from_str(r).unwrap())
        }))
        .unwrap()
    }

    fn at(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    #[test]
    fn two_btc_at_ten_thousand() {
        let t = table(&[("2021-01-01", "10000.00")]);
        let v = Valuer::new(&t, GapPolicy::Strict);
        assert_eq!(v.usd_value(200_000_000, at("2021-01-01T12:00:00Z")).unwrap(), Decimal::from(20_000));
        assert_eq!(v.usd_value(0, at("2021-01-01T00:00:00Z")).unwrap(), Decimal::ZERO);
        assert_eq!(format_usd(Decimal::ZERO), "0.00");
    }

    #[test]
    fn twenty_two_btc_fixture() {
        // 22 × 43,500.00 = 957,000.00 by hand.
        let t = table(&[("2021-06-01", "43500.00")]);
        let v = Valuer::new(&t, GapPolicy::Strict);
        let usd = v.usd_value(22 * SATS_PER_BTC, at("2021-06-01T08:30:00Z")).unwrap();
        assert_eq!(format_usd(usd), "957000.00");
    }

    #[test]
    fn half_even_rounding() {
        // 1 sat at 500.00 -> 0.000005 USD -> 0.00; 150 sats at 10,000 -> 0.015 -> 0.02.
        let t = table(&[("2021-01-01", "500.00"), ("2021-01-02", "10000")]);
        let v = Valuer::new(&t, GapPolicy::Strict);
        assert_eq!(v.usd_value(1, at("2021-01-01T00:00:00Z")).unwrap(), Decimal::ZERO);
        assert_eq!(
            v.usd_value(150, at("2021-01-02T00:00:00Z")).unwrap(),
            Decimal::from_f64(0.02).unwrap()
        );
        // 250 sats -> 0.025 -> 0.02 (round to even).
        assert_eq!(format_usd(v.usd_value(250, at("2021-01-02T00:00:00Z")).unwrap()), "0.02");
    }

    #[test]
    fn gap_policies() {
        let t = table(&[("2021-01-01", "100"), ("2021-01-03", "300")]);
        assert_eq!(t.gaps(), vec![NaiveDate::from_ymd_opt(2021, 1, 2).unwrap()]);
        let strict = Valuer::new(&t, GapPolicy::Strict);
        assert!(matches!(
            strict.usd_value(SATS_PER_BTC, at("2021-01-02T05:00:00Z")),
            Err(ValuationError::MissingRate(_))
        ));
        let carry = Valuer::new(&t, GapPolicy::Carry);
        assert_eq!(carry.usd_value(SATS_PER_BTC, at("2021-01-02T05:00:00Z")).unwrap(), Decimal::from(100));
        assert!(carry.usd_value(1, at("2020-12-31T05:00:00Z")).is_err());
    }

    #[test]
    fn day_offset_moves_calendar_date() {
        let t = table(&[("2021-01-01", "100"), ("2021-01-02", "200")]);
        let v = Valuer::new(&t, GapPolicy::Strict)
            .with_day_offset(FixedOffset::east_opt(3 * 3600).unwrap());
        assert_eq!(v.usd_value(SATS_PER_BTC, at("2021-01-01T22:00:00Z")).unwrap(), Decimal::from(200));
    }

    #[test]
    fn load_errors() {
        let ok = RateTable::load("date,close_usd\n2021-01-01,1.5\n2021-01-02,2\n".as_bytes()).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(matches!(
            RateTable::load("date,close_usd\n2021-01-01,1\n2021-01-01,2\n".as_bytes()),
            Err(ValuationError::DuplicateDate(_))
        ));
        assert!(matches!(
            RateTable::load("date,close_usd\n2021-01-01,0\n".as_bytes()),
            Err(ValuationError::NonPositiveRate(_))
        ));
        assert!(matches!(
            RateTable::load("date,close_usd\n2021-13-01,1\n".as_bytes()),
            Err(ValuationError::UnparseableRow { line: 2, .. })
        ));
        assert!(matches!(
            RateTable::load("day,rate\n".as_bytes()),
            Err(ValuationError::UnparseableRow { line: 1, .. })
        ));
    }

    #[test]
    fn write_load_round_trip() {
        let t = table(&[("2021-01-01", "100.25"), ("2021-01-03", "300.10")]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(RateTable::load(&buf[..]).unwrap(), t);
    }
}

//! Value satoshi amounts in USD at the daily close, with both gap policies.

use chrono::{TimeZone, Utc};
use ransomtrace::valuation::{GapPolicy, RateTable, Valuer};

const RATES: &str = "date,close_usd
2021-03-01,49612.10
2021-03-02,48415.82
2021-03-04,48374.09
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = RateTable::load(RATES.as_bytes())?;
    println!("{} closes, missing days: {:?}", table.len(), table.gaps());

    let strict = Valuer::new(&table, GapPolicy::Strict);
    let carry = Valuer::new(&table, GapPolicy::Carry);
    let amount = 12_345_678;
    for day in 1..=4 {
        let t = Utc.with_ymd_and_hms(2021, 3, day, 18, 30, 0).unwrap();
        let s = strict.usd_value(amount, t).map_or_else(|e| e.to_string(), |v| format!("${v}"));
        let c = carry.usd_value(amount, t)?;
        println!("2021-03-{day:02}: strict {s:<32} carry ${c}");
    }
    Ok(())
}

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rust_decimal::Decimal;

use super::{EconError, EconomicSummary, FlowReport, Group, OriginRow};
use crate::valuation::{format_usd, round_cents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    /// Mermaid diagram text: `pie` for tables, `sankey-beta` for flows.
    GraphText,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "graph-text" => Ok(Format::GraphText),
            other => Err(format!("unknown format {other:?} (expected csv|graph-text)")),
        }
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::GraphText => "mmd",
        }
    }
}

pub enum Report<'a> {
    Summary(&'a EconomicSummary),
    Origins(&'a [OriginRow]),
    Aliases(&'a BTreeMap<String, Decimal>),
    Flows(&'a FlowReport),
}

fn quoted(label: &str) -> String {
    format!("\"{}\"", label.replace('"', "'"))
}

fn pie<W: Write>(mut w: W, title: &str, slices: &[(String, Decimal)]) -> Result<(), EconError> {
    writeln!(w, "pie title {title}")?;
    for (label, usd) in slices {
        if round_cents(*usd) > Decimal::ZERO {
            writeln!(w, "    {} : {}", quoted(label), format_usd(*usd))?;
        }
    }
    Ok(())
}

impl Report<'_> {
    /// Deterministic rendering; amounts are rounded to cents here and only here.
    pub fn write<W: Write>(&self, w: W, format: Format) -> Result<(), EconError> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::GraphText => self.write_graph(w),
        }
    }

    fn write_csv<W: Write>(&self, w: W) -> Result<(), EconError> {
        let mut wtr = csv::Writer::from_writer(w);
        match self {
            Report::Summary(s) => {
                wtr.write_record(["group", "row", "addresses", "usd"])?;
                for r in &s.rows {
                    wtr.write_record([
                        r.line.group().to_string(),
                        r.line.label().to_string(),
                        r.address_count.to_string(),
                        format_usd(r.usd),
                    ])?;
                }
                for (g, label) in [(Group::Income, "Total income"), (Group::Expense, "Total expenses")] {
                    wtr.write_record([
                        g.to_string(),
                        label.to_string(),
                        s.total_addresses(g).to_string(),
                        format_usd(s.total_usd(g)),
                    ])?;
                }
                wtr.write_record(["info", "ransom_overlap", &s.ransom_overlap.to_string(), ""])?;
                wtr.write_record([
                    "info",
                    "likely_already_confirmed",
                    &s.likely_already_confirmed.to_string(),
                    "",
                ])?;
            }
            Report::Origins(rows) => {
                wtr.write_record(["entity", "kind", "risk", "confirmed_usd", "likely_usd", "total_usd"])?;
                for r in rows.iter() {
                    wtr.write_record([
                        r.entity.clone(),
                        r.kind.to_string(),
                        r.risk.map(|x| x.to_string()).unwrap_or_default(),
                        format_usd(r.confirmed_usd),
                        format_usd(r.likely_usd),
                        format_usd(r.total_usd),
                    ])?;
                }
            }
            Report::Aliases(m) => {
                wtr.write_record(["alias", "usd"])?;
                for (alias, usd) in ranked(m) {
                    wtr.write_record([alias.as_str(), &format_usd(usd)])?;
                }
            }
            Report::Flows(f) => {
                wtr.write_record(["from", "to", "usd"])?;
                for e in f.edges() {
                    wtr.write_record([e.from.to_string(), e.to.to_string(), format_usd(e.usd)])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }

    fn write_graph<W: Write>(&self, mut w: W) -> Result<(), EconError> {
        match self {
            Report::Summary(s) => {
                let slices: Vec<_> = s.rows.iter().map(|r| (r.line.label().to_string(), r.usd)).collect();
                pie(w, "Income and expenses (USD)", &slices)
            }
            Report::Origins(rows) => {
                let slices: Vec<_> = rows.iter().map(|r| (r.entity.clone(), r.total_usd)).collect();
                pie(w, "Origin of ransom payments (USD)", &slices)
            }
            Report::Aliases(m) => {
                let slices: Vec<_> = ranked(m).into_iter().map(|(a, u)| (a.clone(), u)).collect();
                pie(w, "Earnings per alias (USD)", &slices)
            }
            Report::Flows(f) => {
                writeln!(w, "sankey-beta")?;
                writeln!(w)?;
                for e in f.edges() {
                    if round_cents(e.usd) > Decimal::ZERO {
                        writeln!(
                            w,
                            "{},{},{}",
                            quoted(&e.from.to_string()),
                            quoted(&e.to.to_string()),
                            format_usd(e.usd)
                        )?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Highest earners first, ties by alias.
fn ranked(m: &BTreeMap<String, Decimal>) -> Vec<(&String, Decimal)> {
    let mut v: Vec<_> = m.iter().map(|(a, u)| (a, *u)).collect();
    v.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    v
}

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::LabelError;
use crate::addr::{validate, Address};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Salary,
    Reimbursement,
    /// One address used for both; kept as its own row rather than two records.
    ReimbursementSalary,
    RansomPayment,
    ClaimedOwnership,
    Services,
    VictimName,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Salary,
        Category::Reimbursement,
        Category::ReimbursementSalary,
        Category::RansomPayment,
        Category::ClaimedOwnership,
        Category::Services,
        Category::VictimName,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Salary => "salary",
            Category::Reimbursement => "reimbursement",
            Category::ReimbursementSalary => "reimbursement_salary",
            Category::RansomPayment => "ransom_payment",
            Category::ClaimedOwnership => "claimed_ownership",
            Category::Services => "services",
            Category::VictimName => "victim_name",
        }
    }

    pub fn is_expense(&self) -> bool {
        matches!(
            self,
            Category::Salary | Category::Reimbursement | Category::ReimbursementSalary
        )
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '-' | '/' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        Ok(match norm.as_str() {
            "salary" => Category::Salary,
            "reimbursement" => Category::Reimbursement,
            "reimbursement_salary" | "salary_reimbursement" => Category::ReimbursementSalary,
            "ransom_payment" | "ransom_payment_address" | "ransom" => Category::RansomPayment,
            "claimed_ownership" => Category::ClaimedOwnership,
            "services" | "service" => Category::Services,
            "victim_name" => Category::VictimName,
            _ => return Err(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelSource {
    LeakAnnotation,
    CrowdsourcedDataset,
    /// Produced by a detector run; carries the run id.
    Derived { run_id: String },
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSource::LeakAnnotation => f.write_str("leak"),
            LabelSource::CrowdsourcedDataset => f.write_str("crowdsourced"),
            LabelSource::Derived { run_id } => write!(f, "derived:{run_id}"),
        }
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "leak" | "leak_annotation" => Ok(LabelSource::LeakAnnotation),
            "crowdsourced" | "crowdsourced_dataset" => Ok(LabelSource::CrowdsourcedDataset),
            _ => match s.strip_prefix("derived:") {
                Some(run) if !run.trim().is_empty() => Ok(LabelSource::Derived {
                    run_id: run.trim().to_string(),
                }),
                _ => Err(s.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelRecord {
    pub address: Address,
    pub category: Category,
    pub source: LabelSource,
    pub owner_alias: Option<String>,
    /// Free text. Victim names live here and are never used as a key.
    pub note: String,
}

/// Annotation store held in canonical order (address, category, source,
/// alias, note) with exact duplicates removed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelStore {
    records: Vec<LabelRecord>,
}

impl LabelStore {
    pub fn from_records(records: impl IntoIterator<Item = LabelRecord>) -> Self {
        let set: BTreeSet<LabelRecord> = records.into_iter().collect();
        LabelStore {
            records: set.into_iter().collect(),
        }
    }

    /// Reads `address,category,alias,note,source` rows after a header.
    pub fn load<R: Read>(r: R) -> Result<Self, LabelError> {
        let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(r);
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 5 {
                return Err(LabelError::InvalidAddressRow {
                    line,
                    reason: format!("expected 5 fields, got {}", rec.len()),
                });
            }
            let address = validate(rec[0].trim()).map_err(|e| LabelError::InvalidAddressRow {
                line,
                reason: format!("{:?}: {e}", &rec[0]),
            })?;
            let category = rec[1]
                .parse()
                .map_err(|value| LabelError::UnknownCategory { line, value })?;
            let source = rec[4]
                .parse()
                .map_err(|value| LabelError::UnknownSource { line, value })?;
            let alias = rec[2].trim();
            out.push(LabelRecord {
                address,
                category,
                source,
                owner_alias: (!alias.is_empty()).then(|| alias.to_string()),
                note: rec[3].to_string(),
            });
        }
        Ok(LabelStore::from_records(out))
    }

    pub fn load_path(path: impl AsRef<std::path::Path>) -> Result<Self, LabelError> {
        LabelStore::load(std::fs::File::open(path)?)
    }

    pub fn dump<W: Write>(&self, w: W) -> Result<(), LabelError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["address", "category", "alias", "note", "source"])?;
        for r in &self.records {
            write_row(&mut wtr, r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Appends a derived label; the run id is mandatory.
    pub fn append_derived(
        &mut self,
        address: Address,
        category: Category,
        note: impl Into<String>,
        run_id: &str,
    ) -> Result<(), LabelError> {
        if run_id.trim().is_empty() {
            return Err(LabelError::MissingProvenance(address));
        }
        let rec = LabelRecord {
            address,
            category,
            source: LabelSource::Derived {
                run_id: run_id.trim().to_string(),
            },
            owner_alias: None,
            note: note.into(),
        };
        if let Err(at) = self.records.binary_search(&rec) {
            self.records.insert(at, rec);
        }
        Ok(())
    }

    pub fn records(&self) -> &[LabelRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn for_address<'a>(&'a self, a: &'a Address) -> impl Iterator<Item = &'a LabelRecord> + 'a {
        let start = self.records.partition_point(|r| &r.address < a);
        self.records[start..].iter().take_while(move |r| &r.address == a)
    }

    /// Distinct addresses carrying `category`, in canonical order.
    pub fn addresses_with(&self, category: Category) -> BTreeSet<&Address> {
        self.records
            .iter()
            .filter(|r| r.category == category)
            .map(|r| &r.address)
            .collect()
    }

    /// Distinct labelled addresses, in canonical order.
    pub fn addresses(&self) -> BTreeSet<&Address> {
        self.records.iter().map(|r| &r.address).collect()
    }

    /// Writes the published-list format: `address,category`, one per line.
    pub fn export_published<W: Write>(&self, w: W) -> Result<(), LabelError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["address", "category"])?;
        let pairs: BTreeSet<(&Address, Category)> =
            self.records.iter().map(|r| (&r.address, r.category)).collect();
        for (a, c) in pairs {
            wtr.write_record([a.as_str(), c.as_str()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn write_row<W: Write>(wtr: &mut csv::Writer<W>, r: &LabelRecord) -> csv::Result<()> {
    wtr.write_record([
        r.address.as_str(),
        r.category.as_str(),
        r.owner_alias.as_deref().unwrap_or(""),
        &r.note,
        &r.source.to_string(),
    ])
}

/// Appends records to a label log file, writing the header when the file is
/// new. Callers serialise access; this is the single-writer path for
/// derived labels.
pub fn append_to_log(path: &std::path::Path, records: &[LabelRecord]) -> Result<(), LabelError> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut wtr = csv::Writer::from_writer(f);
    if fresh {
        wtr.write_record(["address", "category", "alias", "note", "source"])?;
    }
    for r in records {
        if let LabelSource::Derived { run_id } = &r.source {
            if run_id.is_empty() {
                return Err(LabelError::MissingProvenance(r.address.clone()));
            }
        }
        write_row(&mut wtr, r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: &str = "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa";
    const B: &str = "3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy";

    #[test]
    fn parses_categories() {
        let text = format!(
            "address,category,alias,note,source\n{A},salary,mango,,leak\n{B},Reimbursement/Salary,,\"tools, vpn\",leak\n"
        );
        let s = LabelStore::load(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.records()[0].category, Category::Salary);
        assert_eq!(s.records()[0].owner_alias.as_deref(), Some("mango"));
        assert_eq!(s.records()[1].category, Category::ReimbursementSalary);
        assert_eq!(s.records()[1].note, "tools, vpn");
    }

    #[test]
    fn unknown_category() {
        let text = format!("address,category,alias,note,source\n{A},payroll,,,leak\n");
        assert!(matches!(
            LabelStore::load(text.as_bytes()),
            Err(LabelError::UnknownCategory { line: 2, ref value }) if value == "payroll"
        ));
    }

    #[test]
    fn invalid_address_row() {
        let text = "address,category,alias,note,source\n1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNb,salary,,,leak\n";
        assert!(matches!(
            LabelStore::load(text.as_bytes()),
            Err(LabelError::InvalidAddressRow { line: 2, .. })
        ));
    }

    #[test]
    fn derived_requires_run_id() {
        let text = format!("address,category,alias,note,source\n{A},ransom_payment,,,derived:\n");
        assert!(matches!(LabelStore::load(text.as_bytes()), Err(LabelError::UnknownSource { .. })));
        let mut s = LabelStore::default();
        assert!(s.append_derived(A.parse().unwrap(), Category::RansomPayment, "", " ").is_err());
        s.append_derived(A.parse().unwrap(), Category::RansomPayment, "split 25", "run-1").unwrap();
        assert_eq!(s.records()[0].source.to_string(), "derived:run-1");
    }

    #[test]
    fn multiple_sources_per_address() {
        let text = format!(
            "address,category,alias,note,source\n{A},ransom_payment,,,crowdsourced\n{A},ransom_payment,,victim co,leak\n"
        );
        let s = LabelStore::load(text.as_bytes()).unwrap();
        let a: Address = A.parse().unwrap();
        assert_eq!(s.for_address(&a).count(), 2);
        assert_eq!(s.addresses_with(Category::RansomPayment).len(), 1);
    }

    #[test]
    fn published_export() {
        let text = format!("address,category,alias,note,source\n{B},salary,,,leak\n{A},services,,,leak\n");
        let s = LabelStore::load(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        s.export_published(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("address,category\n{A},services\n{B},salary\n")
        );
    }

    #[test]
    fn append_log_writes_header_once() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("derived.csv");
        let rec = LabelRecord {
            address: A.parse().unwrap(),
            category: Category::RansomPayment,
            source: LabelSource::Derived { run_id: "r1".into() },
            owner_alias: None,
            note: String::new(),
        };
        append_to_log(&path, std::slice::from_ref(&rec)).unwrap();
        append_to_log(&path, std::slice::from_ref(&rec)).unwrap();
        let s = LabelStore::load_path(&path).unwrap();
        assert_eq!(s.records(), &[rec]);
    }
}

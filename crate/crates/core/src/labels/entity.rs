use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::LabelError;
use crate::addr::{validate, Address};
use crate::heuristics::CoSpendClusters;

/// Entity name reserved for the single unlabelled funding cluster.
pub const UNLABELED_CLUSTER: &str = "Unlabeled Cluster";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKind {
    Exchange,
    Mixer,
    Marketplace,
    IllegalService,
    UnlabeledCluster,
    Other,
}

impl EntityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntityKind::Exchange => "exchange",
            EntityKind::Mixer => "mixer",
            EntityKind::Marketplace => "marketplace",
            EntityKind::IllegalService => "illegal_service",
            EntityKind::UnlabeledCluster => "unlabeled_cluster",
            EntityKind::Other => "other",
        }
    }
}

impl FromStr for EntityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().replace([' ', '-'], "_").as_str() {
            "exchange" => EntityKind::Exchange,
            "mixer" => EntityKind::Mixer,
            "marketplace" => EntityKind::Marketplace,
            "illegal_service" => EntityKind::IllegalService,
            "unlabeled_cluster" => EntityKind::UnlabeledCluster,
            "other" => EntityKind::Other,
            _ => return Err(s.to_string()),
        })
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Money-laundering risk tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Risk {
    Low,
    Medium,
    High,
    Sanctioned,
}

impl Risk {
    pub fn as_str(&self) -> &'static str {
        match self {
            Risk::Low => "low",
            Risk::Medium => "medium",
            Risk::High => "high",
            Risk::Sanctioned => "sanctioned",
        }
    }
}

impl FromStr for Risk {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "low" => Risk::Low,
            "medium" => Risk::Medium,
            "high" => Risk::High,
            "sanctioned" => Risk::Sanctioned,
            _ => return Err(s.to_string()),
        })
    }
}

impl fmt::Display for Risk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What an entity row attaches to: one address, or the whole co-spend
/// cluster containing a seed address (`cluster:<address>` in files).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityKey {
    Address(Address),
    Cluster(Address),
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKey::Address(a) => write!(f, "{a}"),
            EntityKey::Cluster(a) => write!(f, "cluster:{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityRecord {
    pub key: EntityKey,
    pub entity_name: String,
    pub kind: EntityKind,
    pub risk: Option<Risk>,
}

/// Flow-report bucket: entity kind plus risk tier where one is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bucket {
    pub kind: EntityKind,
    pub risk: Option<Risk>,
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.risk {
            Some(r) => write!(f, "{} ({} risk)", self.kind, r),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl EntityRecord {
    pub fn bucket(&self) -> Bucket {
        Bucket {
            kind: self.kind,
            risk: self.risk,
        }
    }

    /// Low-risk exchanges and the unlabelled cluster count as clean funding.
    pub fn is_clean_source(&self) -> bool {
        matches!(
            (self.kind, self.risk),
            (EntityKind::Exchange, Some(Risk::Low)) | (EntityKind::UnlabeledCluster, _)
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityStore {
    records: Vec<EntityRecord>,
}

impl EntityStore {
    pub fn from_records(records: Vec<EntityRecord>) -> Result<Self, LabelError> {
        let mut seen: BTreeMap<&EntityKey, ()> = BTreeMap::new();
        let mut unlabeled: Option<&str> = None;
        for r in &records {
            if seen.insert(&r.key, ()).is_some() {
                return Err(LabelError::DuplicateEntityKey(r.key.to_string()));
            }
            if r.kind == EntityKind::Exchange && r.risk.is_none() {
                return Err(LabelError::MissingRisk(r.entity_name.clone()));
            }
            if r.kind == EntityKind::UnlabeledCluster {
                match unlabeled {
                    Some(n) if n != r.entity_name => {
                        return Err(LabelError::MultipleUnlabeledNames(
                            n.to_string(),
                            r.entity_name.clone(),
                        ))
                    }
                    _ => unlabeled = Some(&r.entity_name),
                }
            }
        }
        let mut records = records;
        records.sort();
        Ok(EntityStore { records })
    }

    /// Reads `address_or_cluster,entity,kind,risk` rows after a header.
    pub fn load<R: Read>(r: R) -> Result<Self, LabelError> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut out = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 4 {
                return Err(LabelError::InvalidAddressRow {
                    line,
                    reason: format!("expected 4 fields, got {}", rec.len()),
                });
            }
            let raw = rec[0].trim();
            let (is_cluster, addr) = match raw.strip_prefix("cluster:") {
                Some(rest) => (true, rest),
                None => (false, raw),
            };
            let a = validate(addr).map_err(|e| LabelError::InvalidAddressRow {
                line,
                reason: format!("{raw:?}: {e}"),
            })?;
            let kind = rec[2]
                .parse()
                .map_err(|value| LabelError::UnknownKind { line, value })?;
            let risk = match rec[3].trim() {
                "" => None,
                s => Some(s.parse().map_err(|value| LabelError::UnknownRisk { line, value })?),
            };
            out.push(EntityRecord {
                key: if is_cluster {
                    EntityKey::Cluster(a)
                } else {
                    EntityKey::Address(a)
                },
                entity_name: rec[1].trim().to_string(),
                kind,
                risk,
            });
        }
        EntityStore::from_records(out)
    }

    pub fn load_path(path: impl AsRef<std::path::Path>) -> Result<Self, LabelError> {
        EntityStore::load(std::fs::File::open(path)?)
    }

    pub fn dump<W: Write>(&self, w: W) -> Result<(), LabelError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["address_or_cluster", "entity", "kind", "risk"])?;
        for r in &self.records {
            wtr.write_record([
                r.key.to_string().as_str(),
                &r.entity_name,
                r.kind.as_str(),
                r.risk.map_or("", |x| x.as_str()),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.records
    }
}

/// Resolves addresses to entities: direct address rows first, then rows
/// keyed on a co-spend cluster.
#[derive(Debug, Clone, Default)]
pub struct EntityResolver {
    direct: HashMap<Address, EntityRecord>,
    by_representative: HashMap<Address, EntityRecord>,
    clusters: Option<CoSpendClusters>,
}

impl EntityResolver {
    pub fn new(store: &EntityStore, clusters: Option<CoSpendClusters>) -> Self {
        let mut direct = HashMap::new();
        let mut by_representative = HashMap::new();
        for r in store.records() {
            match &r.key {
                EntityKey::Address(a) => {
                    direct.insert(a.clone(), r.clone());
                }
                EntityKey::Cluster(seed) => {
                    let rep = clusters
                        .as_ref()
                        .and_then(|c| c.representative(seed))
                        .unwrap_or(seed)
                        .clone();
                    by_representative.entry(rep).or_insert_with(|| r.clone());
                }
            }
        }
        EntityResolver {
            direct,
            by_representative,
            clusters,
        }
    }

    pub fn entity_of(&self, a: &Address) -> Option<&EntityRecord> {
        if let Some(r) = self.direct.get(a) {
            return Some(r);
        }
        let rep = match &self.clusters {
            Some(c) => c.representative(a)?,
            None => a,
        };
        self.by_representative.get(rep)
    }

    pub fn is_exchange(&self, a: &Address) -> bool {
        self.entity_of(a).is_some_and(|e| e.kind == EntityKind::Exchange)
    }
}

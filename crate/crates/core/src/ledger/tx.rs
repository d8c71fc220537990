use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::addr::Address;

pub const SATS_PER_BTC: u64 = 100_000_000;

/// 32-byte transaction id, rendered as lower-case hex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Txid(pub [u8; 32]);

impl fmt::Display for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl fmt::Debug for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Txid({self})")
    }
}

impl FromStr for Txid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| format!("bad txid {s:?}: {e}"))?;
        Ok(Txid(out))
    }
}

impl Serialize for Txid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Txid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxSlot {
    #[serde(rename = "addr")]
    pub address: Address,
    pub value_sats: u64,
}

impl TxSlot {
    pub fn new(address: Address, value_sats: u64) -> Self {
        TxSlot {
            address,
            value_sats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: Txid,
    #[serde(rename = "time", with = "chrono::serde::ts_seconds")]
    pub timestamp: DateTime<Utc>,
    pub inputs: Vec<TxSlot>,
    pub outputs: Vec<TxSlot>,
    pub fee_sats: u64,
}

impl Transaction {
    pub fn is_coinbase(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn total_in(&self) -> u128 {
        self.inputs.iter().map(|s| s.value_sats as u128).sum()
    }

    pub fn total_out(&self) -> u128 {
        self.outputs.iter().map(|s| s.value_sats as u128).sum()
    }

    pub fn value_to(&self, a: &Address) -> u64 {
        self.outputs
            .iter()
            .filter(|s| &s.address == a)
            .map(|s| s.value_sats)
            .sum()
    }

    pub fn value_from(&self, a: &Address) -> u64 {
        self.inputs
            .iter()
            .filter(|s| &s.address == a)
            .map(|s| s.value_sats)
            .sum()
    }

    /// Checks value conservation. Coinbase transactions (no inputs) must
    /// carry a zero fee and are otherwise exempt.
    pub fn check(&self) -> Result<(), String> {
        if self.outputs.is_empty() {
            return Err("transaction has no outputs".into());
        }
        if self.is_coinbase() {
            if self.fee_sats != 0 {
                return Err("coinbase transaction with non-zero fee".into());
            }
            return Ok(());
        }
        let inputs = self.total_in();
        let outputs = self.total_out() + self.fee_sats as u128;
        if inputs != outputs {
            return Err(format!(
                "inputs {inputs} != outputs + fee {outputs}"
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    #[test]
    fn json_shape() {
        let line = r#"{"txid":"00000000000000000000000000000000000000000000000000000000000000aa","time":1600000000,"inputs":[{"addr":"1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa","value_sats":1000}],"outputs":[{"addr":"3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy","value_sats":900}],"fee_sats":100}"#;
        let tx: Transaction = serde_json::from_str(line).unwrap();
        assert_eq!(tx.timestamp.timestamp(), 1_600_000_000);
        assert!(tx.check().is_ok());
        assert_eq!(serde_json::to_string(&tx).unwrap(), line);
        assert_eq!(tx.value_to(&a("3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy")), 900);
    }

    #[test]
    fn conservation_and_coinbase() {
        let mut tx = Transaction {
            txid: Txid([1; 32]),
            timestamp: DateTime::from_timestamp(0, 0).unwrap(),
            inputs: vec![TxSlot::new(a("1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa"), 10)],
            outputs: vec![TxSlot::new(a("3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy"), 9)],
            fee_sats: 2,
        };
        assert!(tx.check().is_err());
        tx.fee_sats = 1;
        assert!(tx.check().is_ok());
        tx.inputs.clear();
        assert!(tx.check().is_err());
        tx.fee_sats = 0;
        assert!(tx.check().is_ok());
    }
}

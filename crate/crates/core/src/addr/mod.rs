//! Bitcoin payment addresses: bit-exact validation and extraction from chat text.
//!
//! Only mainnet Base58Check (P2PKH, P2SH) and version-0 Bech32 (P2WPKH,
//! P2WSH) are recognised. Anything else is a [`ValidationFailure`].

pub mod base58;
pub mod bech32;
mod extract;

pub use extract::{
    candidate_report, dedupe, extract_candidates, split_valid, CandidateAddress, MentionCounts,
    Span, CONTEXT_RADIUS,
};

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const P2PKH_VERSION: u8 = 0x00;
const P2SH_VERSION: u8 = 0x05;
const SEGWIT_HRP: &str = "bc";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Encoding {
    Base58Check,
    Bech32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptKind {
    P2PKH,
    P2SH,
    P2WPKH,
    P2WSH,
}

impl fmt::Display for ScriptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScriptKind::P2PKH => "p2pkh",
            ScriptKind::P2SH => "p2sh",
            ScriptKind::P2WPKH => "p2wpkh",
            ScriptKind::P2WSH => "p2wsh",
        };
        f.write_str(s)
    }
}

/// The rule a candidate string broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
pub enum ValidationFailure {
    #[error("character outside the address alphabet")]
    Charset,
    #[error("invalid length")]
    Length,
    #[error("checksum mismatch")]
    Checksum,
    #[error("unknown version byte")]
    UnknownVersion,
}

impl ValidationFailure {
    pub fn rule(&self) -> &'static str {
        match self {
            ValidationFailure::Charset => "charset",
            ValidationFailure::Length => "length",
            ValidationFailure::Checksum => "checksum",
            ValidationFailure::UnknownVersion => "unknown_version",
        }
    }
}

/// A validated address. Equality, ordering and hashing use the canonical
/// string only.
#[derive(Clone)]
pub struct Address {
    encoding: Encoding,
    script_kind: ScriptKind,
    canonical: String,
    payload: Vec<u8>,
}

impl Address {
    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn script_kind(&self) -> ScriptKind {
        self.script_kind
    }

    pub fn as_str(&self) -> &str {
        &self.canonical
    }

    /// Hash160 or witness program, without version byte or checksum.
    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Builds an address from its script kind and 20/32-byte payload.
    pub fn from_payload(kind: ScriptKind, payload: &[u8]) -> Result<Self, ValidationFailure> {
        let expected = match kind {
            ScriptKind::P2WSH => 32,
            _ => 20,
        };
        if payload.len() != expected {
            return Err(ValidationFailure::Length);
        }
        let canonical = encode(kind, payload);
        Ok(Address {
            encoding: match kind {
                ScriptKind::P2PKH | ScriptKind::P2SH => Encoding::Base58Check,
                _ => Encoding::Bech32,
            },
            script_kind: kind,
            canonical,
            payload: payload.to_vec(),
        })
    }

    /// Re-encodes from the decoded fields.
    pub fn encode(&self) -> String {
        encode(self.script_kind, &self.payload)
    }
}

fn encode(kind: ScriptKind, payload: &[u8]) -> String {
    match kind {
        ScriptKind::P2PKH | ScriptKind::P2SH => {
            let version = if kind == ScriptKind::P2PKH {
                P2PKH_VERSION
            } else {
                P2SH_VERSION
            };
            let mut buf = Vec::with_capacity(1 + payload.len());
            buf.push(version);
            buf.extend_from_slice(payload);
            base58::encode_check(&buf)
        }
        ScriptKind::P2WPKH | ScriptKind::P2WSH => bech32::encode_segwit(SEGWIT_HRP, 0, payload),
    }
}

/// Checks a candidate string against Base58Check or Bech32 rules.
pub fn validate(candidate: &str) -> Result<Address, ValidationFailure> {
    if candidate.len() >= 3 && candidate.as_bytes()[..3].eq_ignore_ascii_case(b"bc1") {
        validate_bech32(candidate)
    } else {
        validate_base58(candidate)
    }
}

fn validate_base58(s: &str) -> Result<Address, ValidationFailure> {
    if !s.bytes().all(base58::is_base58_char) {
        return Err(ValidationFailure::Charset);
    }
    if !(26..=35).contains(&s.len()) {
        return Err(ValidationFailure::Length);
    }
    let raw = base58::decode(s).ok_or(ValidationFailure::Charset)?;
    if raw.len() != 25 {
        return Err(ValidationFailure::Length);
    }
    let (body, check) = raw.split_at(21);
    if base58::checksum(body) != check {
        return Err(ValidationFailure::Checksum);
    }
    let kind = match body[0] {
        P2PKH_VERSION => ScriptKind::P2PKH,
        P2SH_VERSION => ScriptKind::P2SH,
        _ => return Err(ValidationFailure::UnknownVersion),
    };
    Ok(Address {
        encoding: Encoding::Base58Check,
        script_kind: kind,
        canonical: s.to_string(),
        payload: body[1..].to_vec(),
    })
}

fn validate_bech32(s: &str) -> Result<Address, ValidationFailure> {
    let has_lower = s.bytes().any(|b| b.is_ascii_lowercase());
    let has_upper = s.bytes().any(|b| b.is_ascii_uppercase());
    if has_lower && has_upper {
        return Err(ValidationFailure::Charset);
    }
    let lower = s.to_ascii_lowercase();
    let (hrp, data) = bech32::decode(&lower).map_err(|e| match e {
        bech32::Bech32Error::Charset => ValidationFailure::Charset,
        bech32::Bech32Error::Length => ValidationFailure::Length,
        bech32::Bech32Error::Checksum => ValidationFailure::Checksum,
    })?;
    if hrp != SEGWIT_HRP {
        return Err(ValidationFailure::UnknownVersion);
    }
    let (&version, program5) = data.split_first().ok_or(ValidationFailure::Length)?;
    if version != 0 {
        // v1+ programs use the bech32m constant, which is out of scope here.
        return Err(ValidationFailure::UnknownVersion);
    }
    let program = bech32::convert_bits(program5, 5, 8, false).ok_or(ValidationFailure::Length)?;
    let kind = match program.len() {
        20 => ScriptKind::P2WPKH,
        32 => ScriptKind::P2WSH,
        _ => return Err(ValidationFailure::Length),
    };
    Ok(Address {
        encoding: Encoding::Bech32,
        script_kind: kind,
        canonical: lower,
        payload: program,
    })
}

impl FromStr for Address {
    type Err = ValidationFailure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        validate(s)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({})", self.canonical)
    }
}

impl PartialEq for Address {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Address {}

impl Hash for Address {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for Address {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Address {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        validate(&s).map_err(|e| serde::de::Error::custom(format!("invalid address {s:?}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GENESIS: &str = "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa";

    #[test]
    fn genesis_address_is_p2pkh() {
        let a = validate(GENESIS).unwrap();
        assert_eq!(a.script_kind(), ScriptKind::P2PKH);
        assert_eq!(a.encoding(), Encoding::Base58Check);
        assert_eq!(a.encode(), GENESIS);
    }

    #[test]
    fn flipped_last_char_fails_checksum() {
        assert_eq!(
            validate("1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNb"),
            Err(ValidationFailure::Checksum)
        );
    }

    #[test]
    fn multibyte_prefix_does_not_panic() {
        assert_eq!(validate("a\u{16a68}bc"), Err(ValidationFailure::Charset));
    }

    #[test]
    fn plain_text_is_rejected() {
        assert!(matches!(
            validate("hello"),
            Err(ValidationFailure::Charset | ValidationFailure::Length)
        ));
        assert_eq!(validate("0OIl0OIl0OIl0OIl0OIl0OIl0OIl"), Err(ValidationFailure::Charset));
    }

    #[test]
    fn p2sh_address() {
        let a = validate("3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy").unwrap();
        assert_eq!(a.script_kind(), ScriptKind::P2SH);
    }

    #[test]
    fn unknown_version_byte() {
        // Testnet P2PKH (version 0x6f).
        let s = base58::encode_check(&[0x6f; 21]);
        assert_eq!(validate(&s), Err(ValidationFailure::UnknownVersion));
    }

    #[test]
    fn bip173_segwit_vectors() {
        let a = validate("BC1QW508D6QEJXTDG4Y5R3ZARVARY0C5XW7KV8F3T4").unwrap();
        assert_eq!(a.script_kind(), ScriptKind::P2WPKH);
        assert_eq!(a.as_str(), "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4");
        let b = validate("bc1qrp33g0q5c5txsp9arysrx4k6zdkfs4nce4xj0gdcccefvpysxf3qccfmv3").unwrap();
        assert_eq!(b.script_kind(), ScriptKind::P2WSH);
        assert_eq!(b.encode(), b.as_str());
    }

    #[test]
    fn bech32_mixed_case_and_bad_checksum() {
        assert_eq!(
            validate("bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kV8f3t4"),
            Err(ValidationFailure::Charset)
        );
        assert_eq!(
            validate("bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t5"),
            Err(ValidationFailure::Checksum)
        );
    }

    #[test]
    fn bech32m_taproot_is_out_of_scope() {
        let s = "bc1p5d7rjq7g6rdk2yhzks9smlaqtedr4dekq08ge8ztwac72sfr9rusxg3297";
        assert!(validate(s).is_err());
    }

    #[test]
    fn from_payload_round_trip() {
        for kind in [ScriptKind::P2PKH, ScriptKind::P2SH, ScriptKind::P2WPKH] {
            let a = Address::from_payload(kind, &[7u8; 20]).unwrap();
            assert_eq!(validate(a.as_str()).unwrap().script_kind(), kind);
        }
        let w = Address::from_payload(ScriptKind::P2WSH, &[9u8; 32]).unwrap();
        assert_eq!(validate(w.as_str()).unwrap(), w);
        assert_eq!(
            Address::from_payload(ScriptKind::P2WSH, &[9u8; 20]).unwrap_err(),
            ValidationFailure::Length
        );
    }
}

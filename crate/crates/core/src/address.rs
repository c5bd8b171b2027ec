//! MAC address semantics: local/multicast bits, prefix registry lookup.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::RegistryError;

pub const LOCAL_BIT: u8 = 0x02;
pub const MULTICAST_BIT: u8 = 0x01;

/// 48-bit MAC address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MacAddress(pub [u8; 6]);

impl MacAddress {
    pub const BROADCAST: MacAddress = MacAddress([0xFF; 6]);

    pub fn new(bytes: [u8; 6]) -> Self {
        Self(bytes)
    }

    pub fn from_slice(s: &[u8]) -> Option<Self> {
        if s.len() != 6 {
            return None;
        }
        let mut b = [0u8; 6];
        b.copy_from_slice(s);
        Some(Self(b))
    }

    pub fn as_bytes(&self) -> &[u8; 6] {
        &self.0
    }

    /// First three bytes, the OUI/CID portion.
    pub fn prefix(&self) -> [u8; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn is_local(&self) -> bool {
        self.0[0] & LOCAL_BIT != 0
    }

    pub fn is_multicast(&self) -> bool {
        self.0[0] & MULTICAST_BIT != 0
    }

    /// Address as a 48-bit integer, byte 0 most significant.
    pub fn to_u64(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64)
    }

    pub fn from_u64(v: u64) -> Self {
        let mut b = [0u8; 6];
        for (i, byte) in b.iter_mut().enumerate() {
            *byte = (v >> (8 * (5 - i))) as u8;
        }
        Self(b)
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:02X}:{:02X}:{:02X}:{:02X}:{:02X}:{:02X}",
            self.0[0], self.0[1], self.0[2], self.0[3], self.0[4], self.0[5]
        )
    }
}

impl fmt::Debug for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for MacAddress {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 6 {
            return Err(format!("bad MAC address {s:?}"));
        }
        let mut b = [0u8; 6];
        for (i, p) in parts.iter().enumerate() {
            b[i] = u8::from_str_radix(p, 16).map_err(|e| format!("bad MAC address {s:?}: {e}"))?;
        }
        Ok(Self(b))
    }
}

impl TryFrom<String> for MacAddress {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<MacAddress> for String {
    fn from(m: MacAddress) -> String {
        m.to_string()
    }
}

/// Bit-level address class per the U/L and I/G bits of byte 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AddressClass {
    GlobalUnicast,
    LocalUnicast,
    Multicast,
}

/// Multicast wins over local: a multicast source address is a protocol
/// violation worth flagging distinctly.
pub fn classify_bits(a: MacAddress) -> AddressClass {
    if a.is_multicast() {
        AddressClass::Multicast
    } else if a.is_local() {
        AddressClass::LocalUnicast
    } else {
        AddressClass::GlobalUnicast
    }
}

/// Clears the local bit of byte 0. Idempotent.
pub fn strip_local_bit(a: MacAddress) -> MacAddress {
    let mut b = a.0;
    b[0] &= !LOCAL_BIT;
    MacAddress(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrefixKind {
    Oui,
    Cid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixEntry {
    pub owner: String,
    pub kind: PrefixKind,
    /// Infrastructure manufacturer (AP/extender vendors such as Cisco,
    /// D-Link, Belkin), used by the extender heuristic.
    pub infrastructure: bool,
}

/// 3-byte prefix -> owner registry, loaded from CSV.
#[derive(Debug, Clone, Default)]
pub struct PrefixRegistry {
    entries: HashMap<[u8; 3], PrefixEntry>,
}

/// Registry shipped with the toolkit; covers the prefixes the pipeline
/// rules name. A full IEEE registry can be substituted via `--registry`.
pub const DEFAULT_REGISTRY_CSV: &str = include_str!("../data/registry.csv");

impl PrefixRegistry {
    pub fn builtin() -> Self {
        Self::from_csv_str(DEFAULT_REGISTRY_CSV).expect("builtin registry parses")
    }

    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    /// CSV columns: prefix,owner,kind[,infrastructure]
    pub fn from_csv_str(text: &str) -> Result<Self, RegistryError> {
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("prefix,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
            if fields.len() < 3 {
                return Err(RegistryError::Parse {
                    line: lineno + 1,
                    reason: "expected prefix,owner,kind".into(),
                });
            }
            let prefix = parse_prefix(fields[0]).map_err(|reason| RegistryError::Parse {
                line: lineno + 1,
                reason,
            })?;
            let kind = match fields[2].to_ascii_lowercase().as_str() {
                "oui" => PrefixKind::Oui,
                "cid" => PrefixKind::Cid,
                other => {
                    return Err(RegistryError::Parse {
                        line: lineno + 1,
                        reason: format!("unknown kind {other:?}"),
                    })
                }
            };
            // CIDs live in the locally administered space, OUIs do not.
            let local = prefix[0] & LOCAL_BIT != 0;
            if (kind == PrefixKind::Cid) != local {
                return Err(RegistryError::Parse {
                    line: lineno + 1,
                    reason: format!("kind {kind:?} inconsistent with local bit of {}", fields[0]),
                });
            }
            let infrastructure = fields.get(3).is_some_and(|f| *f == "infra");
            let entry = PrefixEntry {
                owner: fields[1].to_string(),
                kind,
                infrastructure,
            };
            if entries.insert(prefix, entry).is_some() {
                return Err(RegistryError::DuplicatePrefix(fields[0].to_string()));
            }
        }
        Ok(Self { entries })
    }

    /// Exact 3-byte lookup; no local-bit fallback.
    pub fn resolve_prefix(&self, a: MacAddress) -> Option<&PrefixEntry> {
        self.entries.get(&a.prefix())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parse_prefix(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("bad prefix {s:?}"));
    }
    let mut b = [0u8; 3];
    for (i, p) in parts.iter().enumerate() {
        b[i] = u8::from_str_radix(p, 16).map_err(|e| format!("bad prefix {s:?}: {e}"))?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    #[test]
    fn classify_google_cid_is_local() {
        assert_eq!(classify_bits(mac("DA:A1:19:12:34:56")), AddressClass::LocalUnicast);
    }

    #[test]
    fn classify_motorola_oui_is_global() {
        assert_eq!(classify_bits(mac("90:68:C3:00:00:01")), AddressClass::GlobalUnicast);
    }

    #[test]
    fn classify_multicast_wins() {
        assert_eq!(classify_bits(mac("01:00:5E:00:00:01")), AddressClass::Multicast);
        // both bits set: still multicast
        assert_eq!(classify_bits(mac("03:00:00:00:00:00")), AddressClass::Multicast);
    }

    #[test]
    fn strip_local_bit_examples() {
        assert_eq!(strip_local_bit(mac("92:68:C3:AA:BB:CC")), mac("90:68:C3:AA:BB:CC"));
        assert_eq!(strip_local_bit(mac("90:68:C3:AA:BB:CC")), mac("90:68:C3:AA:BB:CC"));
        assert_eq!(strip_local_bit(mac("DA:A1:19:00:00:00")), mac("D8:A1:19:00:00:00"));
    }

    #[test]
    fn registry_resolve() {
        let r = PrefixRegistry::builtin();
        let e = r.resolve_prefix(mac("DA:A1:19:00:00:01")).unwrap();
        assert_eq!(e.owner, "Google");
        assert_eq!(e.kind, PrefixKind::Cid);
        // 92:68:C3 is not an IEEE-allocated prefix
        assert!(r.resolve_prefix(mac("92:68:C3:00:00:01")).is_none());
        assert!(r.resolve_prefix(mac("FF:FF:FF:00:00:01")).is_none());
    }

    #[test]
    fn registry_rejects_kind_bit_mismatch() {
        // OUI with local bit set must be rejected
        assert!(PrefixRegistry::from_csv_str("DA:A1:19,X,oui").is_err());
        assert!(PrefixRegistry::from_csv_str("90:68:C3,X,cid").is_err());
    }

    #[test]
    fn canonical_display_uppercase() {
        assert_eq!(mac("da:a1:19:00:00:01").to_string(), "DA:A1:19:00:00:01");
    }

    #[test]
    fn u64_round_trip() {
        let a = mac("DA:A1:19:12:34:56");
        assert_eq!(MacAddress::from_u64(a.to_u64()), a);
    }
}

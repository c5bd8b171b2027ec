//! Partition observed source addresses into behavior bins: global vs local,
//! service addresses vs randomization schemes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::address::{classify_bits, strip_local_bit, AddressClass, MacAddress, PrefixRegistry};
use crate::capture::{frame_wps, FrameKind, ManagementFrame, WpsAttributes, NINTENDO_OUI, WIFI_DIRECT_OUI, WIFI_DIRECT_TYPE};
use crate::signature::DeviceSignature;

pub const GOOGLE_CID: [u8; 3] = [0xDA, 0xA1, 0x19];
pub const MOTOROLA_LOCAL_PREFIX: [u8; 3] = [0x92, 0x68, 0xC3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bin {
    GlobalUnicast,
    ServiceWifiDirect,
    ServiceNintendo,
    ServiceExtender,
    RandAndroidCidWps,
    RandAndroidCid,
    RandMotorolaCidWps,
    RandMotorolaGlobalScheme,
    RandIos,
    RandWindowsLinux,
    UnknownLocal,
}

impl Bin {
    pub fn is_local(&self) -> bool {
        !matches!(self, Bin::GlobalUnicast)
    }

    pub const ALL: [Bin; 11] = [
        Bin::GlobalUnicast,
        Bin::ServiceWifiDirect,
        Bin::ServiceNintendo,
        Bin::ServiceExtender,
        Bin::RandAndroidCidWps,
        Bin::RandAndroidCid,
        Bin::RandMotorolaCidWps,
        Bin::RandMotorolaGlobalScheme,
        Bin::RandIos,
        Bin::RandWindowsLinux,
        Bin::UnknownLocal,
    ];
}

/// Catalog key: the UUID-E where WPS gave us one (stable across address
/// rotations), otherwise the address itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKey {
    Mac(MacAddress),
    UuidE(String),
}

impl DeviceKey {
    pub fn uuid(u: &[u8; 16]) -> Self {
        DeviceKey::UuidE(hex::encode(u))
    }
}

impl std::fmt::Display for DeviceKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeviceKey::Mac(m) => write!(f, "{m}"),
            DeviceKey::UuidE(u) => write!(f, "uuid:{u}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub key: DeviceKey,
    pub bin: Bin,
    pub signatures_global: BTreeSet<String>,
    pub signatures_random: BTreeSet<String>,
    pub addresses: BTreeSet<MacAddress>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wps: Option<WpsAttributes>,
    /// Rule identifiers that fired, for auditable classification.
    pub evidence: Vec<String>,
    /// True once derandomization tied this record to a global identity.
    #[serde(default)]
    pub linked: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub linked_global: Option<MacAddress>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceBin {
    WifiDirect,
    Nintendo,
    Extender,
}

impl From<ServiceBin> for Bin {
    fn from(s: ServiceBin) -> Bin {
        match s {
            ServiceBin::WifiDirect => Bin::ServiceWifiDirect,
            ServiceBin::Nintendo => Bin::ServiceNintendo,
            ServiceBin::Extender => Bin::ServiceExtender,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    /// detect_global_scheme absolute floor of distinct addresses per prefix.
    pub global_floor: usize,
    /// detect_global_scheme fraction of the capture's distinct addresses.
    pub global_fraction: f64,
    /// Vendor type of the constant Apple probe-request IE (iOS 10+). The
    /// exact byte is configurable.
    pub apple_probe_vendor_type: u8,
    /// Seed iOS signature set; extended by signatures observed on
    /// Apple-OUI global sources.
    pub ios_signatures: BTreeSet<String>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            global_floor: 10,
            global_fraction: 0.20,
            apple_probe_vendor_type: 10,
            ios_signatures: BTreeSet::new(),
        }
    }
}

pub type FrameGroups<'a> = BTreeMap<MacAddress, Vec<&'a ManagementFrame>>;

/// Groups frames by source address. Frames without a source (CTS) are skipped.
pub fn group_by_source(frames: &[ManagementFrame]) -> FrameGroups<'_> {
    let mut groups: FrameGroups = BTreeMap::new();
    for f in frames {
        if let Some(src) = f.source {
            groups.entry(src).or_default().push(f);
        }
    }
    groups
}

fn directed_ssids(frames: &[&ManagementFrame]) -> BTreeSet<Vec<u8>> {
    frames
        .iter()
        .filter(|f| f.kind == FrameKind::ProbeRequest)
        .filter_map(|f| f.ssid.clone())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Service separation over locally assigned addresses (P2P, Nintendo,
/// extenders). `groups` must hold only LocalUnicast keys.
pub fn filter_services(
    groups: &FrameGroups<'_>,
    registry: &PrefixRegistry,
) -> BTreeMap<MacAddress, Option<ServiceBin>> {
    // Extender conjunct iii: the address never changes. Approximated per
    // capture as: no other local address probes the same single SSID with
    // the same signature set.
    let mut ssid_sig_users: BTreeMap<(Vec<u8>, String), BTreeSet<MacAddress>> = BTreeMap::new();
    for (addr, frames) in groups {
        let ssids = directed_ssids(frames);
        if ssids.len() == 1 {
            let ssid = ssids.into_iter().next().unwrap();
            for f in frames.iter().filter(|f| f.kind == FrameKind::ProbeRequest) {
                let sig = DeviceSignature::from_ies(&f.ies).canonical;
                ssid_sig_users.entry((ssid.clone(), sig)).or_default().insert(*addr);
            }
        }
    }

    let mut out = BTreeMap::new();
    for (addr, frames) in groups {
        debug_assert_eq!(classify_bits(*addr), AddressClass::LocalUnicast);
        let bin = service_bin(*addr, frames, registry, &ssid_sig_users);
        out.insert(*addr, bin);
    }
    out
}

fn service_bin(
    addr: MacAddress,
    frames: &[&ManagementFrame],
    registry: &PrefixRegistry,
    ssid_sig_users: &BTreeMap<(Vec<u8>, String), BTreeSet<MacAddress>>,
) -> Option<ServiceBin> {
    let wifi_direct = frames.iter().any(|f| {
        f.find_vendor(WIFI_DIRECT_OUI, WIFI_DIRECT_TYPE).is_some()
            || f.ssid.as_deref().is_some_and(|s| s.starts_with(b"DIRECT-"))
    });
    if wifi_direct {
        return Some(ServiceBin::WifiDirect);
    }

    let nintendo = frames
        .iter()
        .any(|f| f.ies.iter().any(|ie| ie.tag == 221 && ie.vendor_oui == Some(NINTENDO_OUI)));
    if nintendo {
        return Some(ServiceBin::Nintendo);
    }

    let infra_oui = registry
        .resolve_prefix(strip_local_bit(addr))
        .is_some_and(|e| e.infrastructure);
    if infra_oui {
        let ssids = directed_ssids(frames);
        if ssids.len() == 1 {
            let ssid = ssids.into_iter().next().unwrap();
            let stable = frames
                .iter()
                .filter(|f| f.kind == FrameKind::ProbeRequest)
                .all(|f| {
                    let sig = DeviceSignature::from_ies(&f.ies).canonical;
                    ssid_sig_users
                        .get(&(ssid.clone(), sig))
                        .is_some_and(|users| users.len() == 1)
                });
            if stable {
                return Some(ServiceBin::Extender);
            }
        }
    }
    None
}

/// Flags global 3-byte prefixes with an abnormally high distinct-address
/// count inside one capture (OUI-prefixed randomization, the Motorola
/// global-random scheme). Service-classified addresses are excluded.
pub fn detect_global_scheme(
    frames: &[ManagementFrame],
    registry: &PrefixRegistry,
    cfg: &ClassifyConfig,
) -> BTreeSet<[u8; 3]> {
    let groups = group_by_source(frames);
    let local_groups: FrameGroups = groups
        .iter()
        .filter(|(a, _)| classify_bits(**a) == AddressClass::LocalUnicast)
        .map(|(a, f)| (*a, f.clone()))
        .collect();
    let services = filter_services(&local_groups, registry);

    let mut per_prefix: BTreeMap<[u8; 3], usize> = BTreeMap::new();
    let mut total_distinct = 0usize;
    for addr in groups.keys() {
        if services.get(addr).copied().flatten().is_some() {
            continue;
        }
        total_distinct += 1;
        if classify_bits(*addr) == AddressClass::GlobalUnicast {
            *per_prefix.entry(addr.prefix()).or_default() += 1;
        }
    }

    per_prefix
        .into_iter()
        .filter(|(_, count)| {
            *count > cfg.global_floor && (*count as f64) > cfg.global_fraction * total_distinct as f64
        })
        .map(|(p, _)| p)
        .collect()
}

/// Classifies every source address of a parsed capture into records.
pub fn classify_capture(
    frames: &[ManagementFrame],
    registry: &PrefixRegistry,
    cfg: &ClassifyConfig,
) -> Vec<DeviceRecord> {
    let groups = group_by_source(frames);
    let scheme_prefixes = detect_global_scheme(frames, registry, cfg);

    // Bootstrap the iOS signature set from Apple-OUI global sources.
    let mut ios_signatures = cfg.ios_signatures.clone();
    for (addr, fs) in &groups {
        if classify_bits(*addr) == AddressClass::GlobalUnicast
            && registry.resolve_prefix(*addr).is_some_and(|e| e.owner == "Apple")
        {
            for f in fs.iter().filter(|f| f.kind == FrameKind::ProbeRequest) {
                ios_signatures.insert(DeviceSignature::from_ies(&f.ies).canonical);
            }
        }
    }

    let local_groups: FrameGroups = groups
        .iter()
        .filter(|(a, _)| classify_bits(**a) == AddressClass::LocalUnicast)
        .map(|(a, f)| (*a, f.clone()))
        .collect();
    let services = filter_services(&local_groups, registry);

    let mut records: Vec<DeviceRecord> = Vec::new();
    let mut by_uuid: BTreeMap<String, usize> = BTreeMap::new();

    for (addr, fs) in &groups {
        let class = classify_bits(*addr);
        if class == AddressClass::Multicast {
            continue; // protocol-violating source; not a device
        }
        let sigs: BTreeSet<String> = fs
            .iter()
            .filter(|f| f.kind == FrameKind::ProbeRequest)
            .map(|f| DeviceSignature::from_ies(&f.ies).canonical)
            .collect();
        let wps = fs.iter().find_map(|f| frame_wps(f));
        let mut evidence = Vec::new();

        let bin = if class == AddressClass::GlobalUnicast {
            if scheme_prefixes.contains(&addr.prefix()) {
                evidence.push(format!("global-scheme-prefix:{addr}"));
                Bin::RandMotorolaGlobalScheme
            } else {
                evidence.push("bits:global-unicast".into());
                Bin::GlobalUnicast
            }
        } else if let Some(service) = services.get(addr).copied().flatten() {
            evidence.push(format!("service:{service:?}"));
            Bin::from(service)
        } else {
            assign_randomization_bin(*addr, fs, &wps, &ios_signatures, cfg, &mut evidence)
        };

        let (sig_global, sig_random) = if class == AddressClass::GlobalUnicast {
            (sigs, BTreeSet::new())
        } else {
            (BTreeSet::new(), sigs)
        };

        // Records with a UUID-E merge across address rotations.
        let key = match (&wps, bin) {
            (Some(w), Bin::RandAndroidCidWps | Bin::RandMotorolaCidWps) => {
                w.uuid_e.as_ref().map(|u| DeviceKey::uuid(u))
            }
            _ => None,
        }
        .unwrap_or(DeviceKey::Mac(*addr));

        if let DeviceKey::UuidE(u) = &key {
            if let Some(&idx) = by_uuid.get(u) {
                let rec = &mut records[idx];
                rec.addresses.insert(*addr);
                rec.signatures_global.extend(sig_global);
                rec.signatures_random.extend(sig_random);
                rec.evidence.extend(evidence);
                continue;
            }
            by_uuid.insert(u.clone(), records.len());
        }

        records.push(DeviceRecord {
            key,
            bin,
            signatures_global: sig_global,
            signatures_random: sig_random,
            addresses: BTreeSet::from([*addr]),
            wps,
            evidence,
            linked: false,
            linked_global: None,
        });
    }
    records
}

/// Bin assignment for a locally assigned, non-service address.
pub fn assign_randomization_bin(
    addr: MacAddress,
    frames: &[&ManagementFrame],
    wps: &Option<WpsAttributes>,
    ios_signatures: &BTreeSet<String>,
    cfg: &ClassifyConfig,
    evidence: &mut Vec<String>,
) -> Bin {
    let prefix = addr.prefix();
    if prefix == GOOGLE_CID {
        if wps.as_ref().is_some_and(|w| w.uuid_e.is_some()) {
            evidence.push("prefix:DA:A1:19+wps".into());
            return Bin::RandAndroidCidWps;
        }
        evidence.push("prefix:DA:A1:19".into());
        return Bin::RandAndroidCid;
    }
    if prefix == MOTOROLA_LOCAL_PREFIX && wps.as_ref().is_some_and(|w| w.uuid_e.is_some()) {
        evidence.push("prefix:92:68:C3+wps".into());
        return Bin::RandMotorolaCidWps;
    }

    // Windows/Linux: the same locally assigned address also sources
    // auth/assoc/data frames.
    let associated = frames.iter().any(|f| {
        matches!(
            f.kind,
            FrameKind::Authentication | FrameKind::Association | FrameKind::Data
        )
    });
    if associated {
        evidence.push("assoc-with-local-address".into());
        return Bin::RandWindowsLinux;
    }

    // iOS: unregistered local prefix with a signature from the iOS set, or
    // the constant Apple probe vendor IE.
    let apple_ie = frames.iter().any(|f| {
        f.find_vendor(crate::capture::APPLE_OUI, cfg.apple_probe_vendor_type)
            .is_some()
    });
    if apple_ie {
        evidence.push("apple-probe-ie".into());
        return Bin::RandIos;
    }
    let sig_hit = frames
        .iter()
        .filter(|f| f.kind == FrameKind::ProbeRequest)
        .any(|f| ios_signatures.contains(&DeviceSignature::from_ies(&f.ies).canonical));
    if sig_hit {
        evidence.push("ios-signature-set".into());
        return Bin::RandIos;
    }

    evidence.push("unmatched-local".into());
    Bin::UnknownLocal
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinReport {
    pub counts: BTreeMap<Bin, u64>,
    pub corpus_total: u64,
    pub global_total: u64,
    pub local_total: u64,
    /// Distinct randomized keys still unlinked after derandomization.
    pub unlinked_random: u64,
}

pub fn build_bin_report(catalog: &[DeviceRecord]) -> BinReport {
    let mut counts: BTreeMap<Bin, u64> = Bin::ALL.iter().map(|b| (*b, 0)).collect();
    let mut global_total = 0u64;
    let mut local_total = 0u64;
    let mut unlinked = 0u64;
    for rec in catalog {
        *counts.get_mut(&rec.bin).unwrap() += 1;
        if rec.bin.is_local() {
            local_total += 1;
        } else {
            global_total += 1;
        }
        if rec.bin.is_local() && !matches!(rec.bin, Bin::ServiceWifiDirect | Bin::ServiceNintendo | Bin::ServiceExtender) && !rec.linked {
            unlinked += 1;
        }
    }
    BinReport {
        corpus_total: catalog.len() as u64,
        global_total,
        local_total,
        unlinked_random: unlinked,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::{parse_frame_at, InformationElement};
    use crate::frames::build_probe_request;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    fn probe(src: &str, seq: u16, ies: Vec<InformationElement>, ts: u64) -> ManagementFrame {
        parse_frame_at(&build_probe_request(mac(src), seq, &ies), ts).unwrap()
    }

    fn ssid_ie(s: &[u8]) -> InformationElement {
        InformationElement::new(0, s.to_vec())
    }

    #[test]
    fn wifi_direct_by_ssid_prefix() {
        let frames = vec![probe("02:11:22:33:44:55", 1, vec![ssid_ie(b"DIRECT-AB")], 0)];
        let groups = group_by_source(&frames);
        let out = filter_services(&groups, &PrefixRegistry::builtin());
        assert_eq!(out[&mac("02:11:22:33:44:55")], Some(ServiceBin::WifiDirect));
    }

    #[test]
    fn wifi_direct_by_vendor_ie() {
        let ie = InformationElement::new(221, vec![0x50, 0x6F, 0x9A, 10, 0x01]);
        let frames = vec![probe("02:11:22:33:44:55", 1, vec![ssid_ie(b""), ie], 0)];
        let groups = group_by_source(&frames);
        let out = filter_services(&groups, &PrefixRegistry::builtin());
        assert_eq!(out[&mac("02:11:22:33:44:55")], Some(ServiceBin::WifiDirect));
    }

    #[test]
    fn nintendo_by_vendor_ie() {
        let ie = InformationElement::new(221, vec![0x00, 0x1F, 0x32, 0x00, 0x01]);
        let frames = vec![probe("02:AA:BB:33:44:55", 1, vec![ie], 0)];
        let groups = group_by_source(&frames);
        let out = filter_services(&groups, &PrefixRegistry::builtin());
        assert_eq!(out[&mac("02:AA:BB:33:44:55")], Some(ServiceBin::Nintendo));
    }

    #[test]
    fn extender_requires_all_conjuncts() {
        let reg = PrefixRegistry::builtin();
        // Cisco OUI 00:40:96 with local bit -> 02:40:96, one directed SSID.
        let good = vec![
            probe("02:40:96:00:00:01", 1, vec![ssid_ie(b"HomeNet")], 0),
            probe("02:40:96:00:00:01", 2, vec![ssid_ie(b"HomeNet")], 10),
        ];
        let groups = group_by_source(&good);
        assert_eq!(
            filter_services(&groups, &reg)[&mac("02:40:96:00:00:01")],
            Some(ServiceBin::Extender)
        );

        // Drop the infra-OUI conjunct: unregistered prefix.
        let no_oui = vec![probe("02:41:96:00:00:01", 1, vec![ssid_ie(b"HomeNet")], 0)];
        let groups = group_by_source(&no_oui);
        assert_eq!(filter_services(&groups, &reg)[&mac("02:41:96:00:00:01")], None);

        // Drop the single-SSID conjunct: two directed SSIDs.
        let two_ssids = vec![
            probe("02:40:96:00:00:02", 1, vec![ssid_ie(b"A")], 0),
            probe("02:40:96:00:00:02", 2, vec![ssid_ie(b"B")], 10),
        ];
        let groups = group_by_source(&two_ssids);
        assert_eq!(filter_services(&groups, &reg)[&mac("02:40:96:00:00:02")], None);

        // Drop the stable-address conjunct: a second address with the same
        // signature probes the same SSID.
        let changing = vec![
            probe("02:40:96:00:00:03", 1, vec![ssid_ie(b"HomeNet")], 0),
            probe("02:40:96:00:00:04", 2, vec![ssid_ie(b"HomeNet")], 10),
        ];
        let groups = group_by_source(&changing);
        let out = filter_services(&groups, &reg);
        assert_eq!(out[&mac("02:40:96:00:00:03")], None);
        assert_eq!(out[&mac("02:40:96:00:00:04")], None);
    }

    #[test]
    fn global_scheme_detection_and_boundary() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        // 50 distinct addresses under one Motorola OUI + 59 singleton devices.
        let mut frames = Vec::new();
        for i in 0..50u8 {
            frames.push(probe(&format!("90:68:C3:00:01:{i:02X}"), i as u16, vec![], i as u64));
        }
        for i in 0..59u8 {
            frames.push(probe(&format!("00:17:{i:02X}:00:02:01"), i as u16, vec![], 1000 + i as u64));
        }
        let flagged = detect_global_scheme(&frames, &reg, &cfg);
        assert_eq!(flagged.into_iter().collect::<Vec<_>>(), vec![[0x90, 0x68, 0xC3]]);

        // 100 distinct single-address devices: nothing flagged.
        let mut frames = Vec::new();
        for i in 0..100u8 {
            frames.push(probe(&format!("00:{i:02X}:F2:00:00:01"), 1, vec![], i as u64));
        }
        assert!(detect_global_scheme(&frames, &reg, &cfg).is_empty());

        // Boundary: exactly 10 distinct at ~19% -> not flagged (fails both).
        let mut frames = Vec::new();
        for i in 0..10u8 {
            frames.push(probe(&format!("90:68:C3:00:01:{i:02X}"), 1, vec![], i as u64));
        }
        for i in 0..43u8 {
            frames.push(probe(&format!("00:{i:02X}:F2:00:00:01"), 1, vec![], 100 + i as u64));
        }
        assert!(detect_global_scheme(&frames, &reg, &cfg).is_empty());
    }

    #[test]
    fn android_cid_bins() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        let wps_ie = crate::capture::encode_wps(&WpsAttributes {
            uuid_e: Some([7u8; 16]),
            ..Default::default()
        });
        let frames = vec![
            probe("DA:A1:19:00:00:01", 1, vec![ssid_ie(b""), wps_ie], 0),
            probe("DA:A1:19:00:00:02", 2, vec![ssid_ie(b"")], 10),
        ];
        let catalog = classify_capture(&frames, &reg, &cfg);
        let bins: Vec<Bin> = catalog.iter().map(|r| r.bin).collect();
        assert!(bins.contains(&Bin::RandAndroidCidWps));
        assert!(bins.contains(&Bin::RandAndroidCid));
        let wps_rec = catalog.iter().find(|r| r.bin == Bin::RandAndroidCidWps).unwrap();
        assert!(matches!(wps_rec.key, DeviceKey::UuidE(_)));
    }

    #[test]
    fn uuid_merges_rotating_addresses() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        let wps_ie = crate::capture::encode_wps(&WpsAttributes {
            uuid_e: Some([7u8; 16]),
            ..Default::default()
        });
        let frames = vec![
            probe("DA:A1:19:00:00:01", 1, vec![wps_ie.clone()], 0),
            probe("DA:A1:19:00:00:02", 2, vec![wps_ie], 10),
        ];
        let catalog = classify_capture(&frames, &reg, &cfg);
        assert_eq!(catalog.len(), 1);
        assert_eq!(catalog[0].addresses.len(), 2);
    }

    #[test]
    fn windows_linux_by_association() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        let local = mac("06:11:22:33:44:55");
        let ap = mac("00:40:96:00:00:99");
        let frames = vec![
            probe("06:11:22:33:44:55", 1, vec![ssid_ie(b"")], 0),
            parse_frame_at(&crate::frames::build_authentication(local, ap, 2), 10).unwrap(),
        ];
        let catalog = classify_capture(&frames, &reg, &cfg);
        assert_eq!(catalog[0].bin, Bin::RandWindowsLinux);
    }

    #[test]
    fn ios_by_signature_set() {
        let reg = PrefixRegistry::builtin();
        let mut cfg = ClassifyConfig::default();
        cfg.ios_signatures.insert("0,1".to_string());
        let ies = vec![ssid_ie(b""), InformationElement::new(1, vec![0x82])];
        let frames = vec![probe("06:AA:BB:33:44:55", 1, ies, 0)];
        let catalog = classify_capture(&frames, &reg, &cfg);
        assert_eq!(catalog[0].bin, Bin::RandIos);
    }

    #[test]
    fn ios_bootstrap_from_apple_global() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        let ies = vec![ssid_ie(b""), InformationElement::new(1, vec![0x82])];
        let frames = vec![
            probe("00:17:F2:00:00:01", 1, ies.clone(), 0), // Apple global source
            probe("06:AA:BB:33:44:55", 2, ies, 10),        // random local, same sig
        ];
        let catalog = classify_capture(&frames, &reg, &cfg);
        let local = catalog.iter().find(|r| r.addresses.contains(&mac("06:AA:BB:33:44:55"))).unwrap();
        assert_eq!(local.bin, Bin::RandIos);
    }

    #[test]
    fn partition_is_total_and_report_sums() {
        let reg = PrefixRegistry::builtin();
        let cfg = ClassifyConfig::default();
        let frames = vec![
            probe("00:17:F2:00:00:01", 1, vec![], 0),
            probe("06:AA:BB:33:44:55", 2, vec![], 10),
            probe("DA:A1:19:00:00:01", 3, vec![], 20),
        ];
        let catalog = classify_capture(&frames, &reg, &cfg);
        assert_eq!(catalog.len(), 3);
        let report = build_bin_report(&catalog);
        assert_eq!(report.corpus_total, 3);
        assert_eq!(report.global_total + report.local_total, 3);
        let sum: u64 = report.counts.values().sum();
        assert_eq!(sum, report.corpus_total);
    }

    #[test]
    fn empty_catalog_all_zero_report() {
        let report = build_bin_report(&[]);
        assert_eq!(report.corpus_total, 0);
        assert!(report.counts.values().all(|&c| c == 0));
    }
}

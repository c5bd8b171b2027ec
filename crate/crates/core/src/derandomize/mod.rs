//! Derandomization attacks: sequence-number chaining, UUID-E reversal,
//! auth/assoc linking, Karma audit, Bluetooth Type-6 correlation.

pub mod rainbow;
pub mod uuid_e;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::address::{classify_bits, AddressClass, MacAddress};
use crate::capture::{FrameKind, ManagementFrame, APPLE_OUI, APPLE_TYPE6};
use crate::classify::{DeviceKey, DeviceRecord};
use crate::error::TableError;
use crate::signature::{DeviceSignature, SignaturePair};

pub use rainbow::{build_rainbow_table, RainbowTable, Reversal, TableInfo};
pub use uuid_e::{is_degenerate, uuid_e_from_mac, DEGENERATE_UUID_E, WPS_UUID_NAMESPACE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkMethod {
    SeqChain,
    UuidReversal,
    AuthAssoc,
    Type6Correlation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkEvidence {
    /// Indices into the time-ordered frame list of the capture.
    pub frame_a: usize,
    pub frame_b: usize,
    pub seq_delta: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub global: MacAddress,
    pub randomized: BTreeSet<MacAddress>,
    pub method: LinkMethod,
    pub confidence: Confidence,
    pub evidence: Vec<LinkEvidence>,
}

/// An ambiguous join: a frame satisfied the window against several chains
/// and was rejected rather than guessed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbiguityLog {
    pub frame_index: usize,
    pub candidate_chains: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// Maximum forward sequence gap (mod 4096) for a join.
    pub max_gap: u16,
    /// Maximum time gap in microseconds for a join.
    pub max_dt_us: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            max_gap: 30,
            max_dt_us: 2_000_000,
        }
    }
}

pub fn seq_delta(from: u16, to: u16) -> u16 {
    (to.wrapping_sub(from)) & 0x0FFF
}

struct Chain {
    last_seq: u16,
    last_time: u64,
    last_frame_index: usize,
    /// Signatures seen on global-state and randomized-state frames.
    sigs_global: BTreeSet<String>,
    sigs_random: BTreeSet<String>,
    addresses: BTreeSet<MacAddress>,
    globals: BTreeSet<MacAddress>,
    frames: usize,
    evidence: Vec<LinkEvidence>,
}

impl Chain {
    fn new(idx: usize, f: &ManagementFrame, sig: String, is_global: bool) -> Self {
        let mut chain = Self {
            last_seq: f.sequence_number,
            last_time: f.timestamp,
            last_frame_index: idx,
            sigs_global: BTreeSet::new(),
            sigs_random: BTreeSet::new(),
            addresses: BTreeSet::new(),
            globals: BTreeSet::new(),
            frames: 0,
            evidence: Vec::new(),
        };
        chain.record(f, sig, is_global);
        chain
    }

    fn record(&mut self, f: &ManagementFrame, sig: String, is_global: bool) {
        let src = f.source.unwrap();
        if is_global {
            self.globals.insert(src);
            self.sigs_global.insert(sig);
        } else {
            self.addresses.insert(src);
            self.sigs_random.insert(sig);
        }
        self.last_seq = f.sequence_number;
        self.last_time = f.timestamp;
        self.frames += 1;
    }

    fn absorb(&mut self, idx: usize, f: &ManagementFrame, sig: String, is_global: bool) {
        let delta = seq_delta(self.last_seq, f.sequence_number);
        self.evidence.push(LinkEvidence {
            frame_a: self.last_frame_index,
            frame_b: idx,
            seq_delta: delta,
        });
        self.record(f, sig, is_global);
        self.last_frame_index = idx;
    }

    fn window_ok(&self, f: &ManagementFrame, cfg: &ChainConfig) -> bool {
        let delta = seq_delta(self.last_seq, f.sequence_number);
        delta >= 1
            && delta <= cfg.max_gap
            && f.timestamp >= self.last_time
            && f.timestamp - self.last_time <= cfg.max_dt_us
    }

    /// Orientation-aware gate: a randomized-state frame pairs against the
    /// chain's global-state signatures and vice versa; address identity
    /// outranks signatures.
    fn sig_compatible(
        &self,
        src: MacAddress,
        sig: &str,
        pairs: &[SignaturePair],
        frame_is_global: bool,
    ) -> bool {
        if self.addresses.contains(&src) || self.globals.contains(&src) {
            return true;
        }
        if self.sigs_global.contains(sig) || self.sigs_random.contains(sig) {
            return true;
        }
        pairs.iter().any(|p| {
            if frame_is_global {
                p.global == *sig && self.sigs_random.contains(&p.random)
            } else {
                p.random == *sig && self.sigs_global.contains(&p.global)
            }
        })
    }
}

fn chainable(f: &ManagementFrame) -> bool {
    f.kind == FrameKind::ProbeRequest && f.source.is_some()
}

/// A source counts as global-state only when its bits say global AND its
/// prefix is not a detected OUI-randomization prefix (the Motorola global
/// scheme hides randomized addresses behind global-looking prefixes).
fn global_state(src: MacAddress, scheme_prefixes: &BTreeSet<[u8; 3]>) -> bool {
    classify_bits(src) == AddressClass::GlobalUnicast && !scheme_prefixes.contains(&src.prefix())
}

/// Greedy time-order sequence chaining over probe requests. A chain with at
/// least one global address and at least one join yields a SeqChain link.
pub fn chain_sequences(
    frames: &[ManagementFrame],
    pairs: &[SignaturePair],
    cfg: &ChainConfig,
) -> (Vec<LinkResult>, Vec<AmbiguityLog>) {
    chain_sequences_with(frames, pairs, cfg, &BTreeSet::new())
}

pub fn chain_sequences_with(
    frames: &[ManagementFrame],
    pairs: &[SignaturePair],
    cfg: &ChainConfig,
    scheme_prefixes: &BTreeSet<[u8; 3]>,
) -> (Vec<LinkResult>, Vec<AmbiguityLog>) {
    let mut chains: Vec<Chain> = Vec::new();
    let mut ambiguities = Vec::new();

    for (idx, f) in frames.iter().enumerate() {
        if !chainable(f) {
            continue;
        }
        let src = f.source.unwrap();
        if classify_bits(src) == AddressClass::Multicast {
            continue;
        }
        let is_global = global_state(src, scheme_prefixes);
        let sig = DeviceSignature::from_ies(&f.ies).canonical;
        let candidates: Vec<usize> = chains
            .iter()
            .enumerate()
            .filter(|(_, c)| c.window_ok(f, cfg) && c.sig_compatible(src, &sig, pairs, is_global))
            .map(|(i, _)| i)
            .collect();
        match candidates.len() {
            1 => chains[candidates[0]].absorb(idx, f, sig, is_global),
            0 => chains.push(Chain::new(idx, f, sig, is_global)),
            n => {
                ambiguities.push(AmbiguityLog {
                    frame_index: idx,
                    candidate_chains: n,
                });
                chains.push(Chain::new(idx, f, sig, is_global));
            }
        }
    }

    let links = chains
        .into_iter()
        .filter(|c| c.frames >= 2 && c.globals.len() == 1)
        .map(|c| LinkResult {
            global: *c.globals.iter().next().unwrap(),
            randomized: c.addresses,
            method: LinkMethod::SeqChain,
            confidence: Confidence::Heuristic,
            evidence: c.evidence,
        })
        .collect();
    (links, ambiguities)
}

/// Follows randomized probe chains into a global-sourced authentication or
/// association frame (the only globally addressed frames iOS emits).
pub fn link_auth_assoc(
    frames: &[ManagementFrame],
    pairs: &[SignaturePair],
    cfg: &ChainConfig,
) -> Vec<LinkResult> {
    link_auth_assoc_with(frames, pairs, cfg, &BTreeSet::new())
}

pub fn link_auth_assoc_with(
    frames: &[ManagementFrame],
    pairs: &[SignaturePair],
    cfg: &ChainConfig,
    scheme_prefixes: &BTreeSet<[u8; 3]>,
) -> Vec<LinkResult> {
    // Probe chains over randomized-state sources only.
    let mut chains: Vec<Chain> = Vec::new();
    let mut links = Vec::new();

    for (idx, f) in frames.iter().enumerate() {
        let Some(src) = f.source else { continue };
        match f.kind {
            FrameKind::ProbeRequest => {
                if classify_bits(src) == AddressClass::Multicast || global_state(src, scheme_prefixes) {
                    continue;
                }
                let sig = DeviceSignature::from_ies(&f.ies).canonical;
                let candidates: Vec<usize> = chains
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.window_ok(f, cfg) && c.sig_compatible(src, &sig, pairs, false))
                    .map(|(i, _)| i)
                    .collect();
                match candidates.len() {
                    1 => chains[candidates[0]].absorb(idx, f, sig, false),
                    _ => chains.push(Chain::new(idx, f, sig, false)),
                }
            }
            FrameKind::Authentication | FrameKind::Association => {
                if classify_bits(src) != AddressClass::GlobalUnicast {
                    continue;
                }
                // With IEs present the signature gate applies; bare auth
                // frames rely on an unambiguous window.
                let sig = if f.ies.is_empty() {
                    None
                } else {
                    Some(DeviceSignature::from_ies(&f.ies).canonical)
                };
                let candidates: Vec<usize> = chains
                    .iter()
                    .enumerate()
                    .filter(|(i, c)| {
                        let _ = i;
                        c.window_ok(f, cfg)
                            && match &sig {
                                Some(s) => c.sig_compatible(src, s, pairs, true),
                                None => true,
                            }
                    })
                    .map(|(i, _)| i)
                    .collect();
                if candidates.len() == 1 {
                    let c = &mut chains[candidates[0]];
                    let delta = seq_delta(c.last_seq, f.sequence_number);
                    let mut evidence = c.evidence.clone();
                    evidence.push(LinkEvidence {
                        frame_a: c.last_frame_index,
                        frame_b: idx,
                        seq_delta: delta,
                    });
                    links.push(LinkResult {
                        global: src,
                        randomized: c.addresses.clone(),
                        method: LinkMethod::AuthAssoc,
                        confidence: Confidence::Heuristic,
                        evidence,
                    });
                    // The device continues its counter past the auth frame.
                    c.last_seq = f.sequence_number;
                    c.last_time = f.timestamp;
                    c.last_frame_index = idx;
                }
            }
            _ => {}
        }
    }
    links
}

/// Reverses every WPS-keyed record through the table, producing Exact links.
pub fn reverse_catalog(
    catalog: &[DeviceRecord],
    table: &mut RainbowTable,
) -> Result<Vec<LinkResult>, TableError> {
    let mut links = Vec::new();
    for rec in catalog {
        let Some(uuid) = rec.wps.as_ref().and_then(|w| w.uuid_e) else {
            continue;
        };
        match table.reverse_uuid(&uuid) {
            Ok(Some(rev)) if !rev.degenerate => links.push(LinkResult {
                global: rev.mac,
                randomized: rec.addresses.clone(),
                method: LinkMethod::UuidReversal,
                confidence: Confidence::Exact,
                evidence: Vec::new(),
            }),
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(links)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KarmaFinding {
    pub key: DeviceKey,
    pub directed_ssids: Vec<String>,
    pub offload_flag: bool,
}

#[derive(Debug, Clone)]
pub struct KarmaConfig {
    pub offload_ssids: Vec<String>,
    pub top_n: usize,
}

impl Default for KarmaConfig {
    fn default() -> Self {
        Self {
            offload_ssids: vec!["BELL_WIFI".into(), "5099251212".into(), "attwifibn".into()],
            top_n: 10,
        }
    }
}

/// Karma-vulnerability audit: one finding per device that sent a directed
/// probe, plus the corpus-wide top-N SSID frequency table.
pub fn audit_karma(
    groups: &BTreeMap<DeviceKey, Vec<&ManagementFrame>>,
    cfg: &KarmaConfig,
) -> (Vec<KarmaFinding>, Vec<(String, usize)>) {
    let mut findings = Vec::new();
    let mut ssid_counts: BTreeMap<String, usize> = BTreeMap::new();

    for (key, frames) in groups {
        let mut directed: BTreeSet<String> = BTreeSet::new();
        for f in frames.iter().filter(|f| f.kind == FrameKind::ProbeRequest) {
            if let Some(ssid) = &f.ssid {
                if !ssid.is_empty() {
                    directed.insert(String::from_utf8_lossy(ssid).into_owned());
                }
            }
        }
        if directed.is_empty() {
            continue;
        }
        for s in &directed {
            *ssid_counts.entry(s.clone()).or_default() += 1;
        }
        let offload_flag = directed.iter().any(|s| cfg.offload_ssids.iter().any(|o| o == s));
        findings.push(KarmaFinding {
            key: key.clone(),
            directed_ssids: directed.into_iter().collect(),
            offload_flag,
        });
    }

    let mut top: Vec<(String, usize)> = ssid_counts.into_iter().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(cfg.top_n);
    (findings, top)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffsetClass {
    OneHigher,
    OneLower,
    Same,
    SameOuiOther,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Type6Finding {
    pub link: LinkResult,
    pub bluetooth: MacAddress,
    pub offset: OffsetClass,
}

/// Apple hotspot beacons: the Type 6 vendor IE carries the Bluetooth MAC;
/// the global WiFi MAC is the Type 6 first byte spliced onto the beacon
/// source's last five bytes.
pub fn correlate_type6(beacons: &[ManagementFrame]) -> Result<Vec<Type6Finding>, TableError> {
    let mut out = Vec::new();
    for f in beacons {
        if f.kind != FrameKind::Beacon {
            continue;
        }
        let Some(src) = f.source else { continue };
        let Some(ie) = f.find_vendor(APPLE_OUI, APPLE_TYPE6) else {
            continue;
        };
        let payload = &ie.value[4..];
        if payload.len() != 6 {
            return Err(TableError::MalformedType6(payload.len()));
        }
        let bluetooth = MacAddress::from_slice(payload).unwrap();
        let mut wifi = *src.as_bytes();
        wifi[0] = bluetooth.0[0];
        let wifi = MacAddress(wifi);

        let bt = bluetooth.to_u64();
        let wf = wifi.to_u64();
        let offset = if bt == wf.wrapping_add(1) {
            OffsetClass::OneHigher
        } else if bt == wf.wrapping_sub(1) {
            OffsetClass::OneLower
        } else if bt == wf {
            OffsetClass::Same
        } else {
            OffsetClass::SameOuiOther
        };

        out.push(Type6Finding {
            link: LinkResult {
                global: wifi,
                randomized: BTreeSet::from([src]),
                method: LinkMethod::Type6Correlation,
                confidence: Confidence::Exact,
                evidence: Vec::new(),
            },
            bluetooth,
            offset,
        });
    }
    Ok(out)
}

/// Folds link results back into the catalog: marks records linked and
/// rewrites randomized-record keys to the recovered global identity.
pub fn apply_links(catalog: &mut [DeviceRecord], links: &[LinkResult]) {
    let mut by_addr: BTreeMap<MacAddress, (MacAddress, LinkMethod)> = BTreeMap::new();
    for link in links {
        for r in &link.randomized {
            by_addr.entry(*r).or_insert((link.global, link.method));
        }
    }
    // Collect global-state signatures per global address so linked records
    // carry both signature sets.
    let mut global_sigs: BTreeMap<MacAddress, BTreeSet<String>> = BTreeMap::new();
    for rec in catalog.iter() {
        if matches!(rec.bin, crate::classify::Bin::GlobalUnicast) {
            for addr in &rec.addresses {
                global_sigs
                    .entry(*addr)
                    .or_default()
                    .extend(rec.signatures_global.iter().cloned());
            }
        }
    }
    for rec in catalog.iter_mut() {
        let hit = rec.addresses.iter().find_map(|a| by_addr.get(a).copied());
        if let Some((global, method)) = hit {
            rec.linked = true;
            rec.linked_global = Some(global);
            rec.evidence.push(format!("linked:{method:?}:{global}"));
            if let Some(sigs) = global_sigs.get(&global) {
                rec.signatures_global.extend(sigs.iter().cloned());
            }
        }
    }
}

/// Deduplicates linked randomized records sharing one global identity, so
/// bin counts key on devices rather than addresses.
pub fn merge_linked(catalog: Vec<DeviceRecord>) -> Vec<DeviceRecord> {
    let mut merged: Vec<DeviceRecord> = Vec::new();
    let mut by_global: BTreeMap<(MacAddress, crate::classify::Bin), usize> = BTreeMap::new();
    for rec in catalog {
        if let (true, Some(g)) = (rec.linked, rec.linked_global) {
            if let Some(&idx) = by_global.get(&(g, rec.bin)) {
                let target = &mut merged[idx];
                target.addresses.extend(rec.addresses.iter().copied());
                target.signatures_global.extend(rec.signatures_global.iter().cloned());
                target.signatures_random.extend(rec.signatures_random.iter().cloned());
                target.evidence.extend(rec.evidence.iter().cloned());
                continue;
            }
            let mut rec = rec;
            rec.key = DeviceKey::Mac(g);
            by_global.insert((g, rec.bin), merged.len());
            merged.push(rec);
            continue;
        }
        merged.push(rec);
    }
    merged
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerandOutcome {
    pub links: Vec<LinkResult>,
    pub ambiguities: Vec<AmbiguityLog>,
    /// Whether UUID-E reversal ran (a rainbow table was supplied).
    pub reversal_ran: bool,
    /// Devices per (bin, method): the Table-6-style coverage matrix.
    pub matrix: BTreeMap<crate::classify::Bin, BTreeMap<LinkMethod, usize>>,
}

/// Full derandomization pass over one capture: UUID-E reversal bootstraps
/// links, signature pairs are mined from linked records, and chaining reruns
/// with the learned pairs until the link set stops growing (two passes
/// suffice: pairs only come from records linked in an earlier pass).
pub fn derand_pipeline(
    frames: &[ManagementFrame],
    records: &mut Vec<DeviceRecord>,
    mut table: Option<&mut RainbowTable>,
    registry: &crate::address::PrefixRegistry,
    classify_cfg: &crate::classify::ClassifyConfig,
    chain_cfg: &ChainConfig,
) -> Result<DerandOutcome, TableError> {
    let scheme_prefixes = crate::classify::detect_global_scheme(frames, registry, classify_cfg);

    let mut reversal_links = Vec::new();
    if let Some(table) = table.as_deref_mut() {
        reversal_links = reverse_catalog(records, table)?;
        apply_links(records, &reversal_links);
    }

    let mut pairs = crate::signature::signature_pairs(records);
    let mut links = Vec::new();
    let mut ambiguities = Vec::new();
    for _pass in 0..2 {
        let (chain_links, amb) =
            chain_sequences_with(frames, &pairs, chain_cfg, &scheme_prefixes);
        let auth_links = link_auth_assoc_with(frames, &pairs, chain_cfg, &scheme_prefixes);
        links = chain_links;
        links.extend(auth_links);
        ambiguities = amb;
        apply_links(records, &links);
        pairs = crate::signature::signature_pairs(records);
    }

    links.extend(reversal_links);
    links.extend(correlate_type6(frames)?.into_iter().map(|f| f.link));
    apply_links(records, &links);

    let matrix = method_matrix(records, &links);
    Ok(DerandOutcome {
        links,
        ambiguities,
        reversal_ran: table.is_some(),
        matrix,
    })
}

/// Counts distinct devices per (bin, method). A link with an empty
/// randomized set (a pure-global chain) credits the global record itself.
pub fn method_matrix(
    catalog: &[DeviceRecord],
    links: &[LinkResult],
) -> BTreeMap<crate::classify::Bin, BTreeMap<LinkMethod, usize>> {
    let mut devices: BTreeMap<(crate::classify::Bin, LinkMethod), BTreeSet<&DeviceKey>> =
        BTreeMap::new();
    for link in links {
        for rec in catalog {
            let hit = if link.randomized.is_empty() {
                rec.addresses.contains(&link.global)
            } else {
                link.randomized.iter().any(|a| rec.addresses.contains(a))
            };
            if hit {
                devices.entry((rec.bin, link.method)).or_default().insert(&rec.key);
            }
        }
    }
    let mut matrix: BTreeMap<crate::classify::Bin, BTreeMap<LinkMethod, usize>> = BTreeMap::new();
    for ((bin, method), keys) in devices {
        matrix.entry(bin).or_default().insert(method, keys.len());
    }
    matrix
}

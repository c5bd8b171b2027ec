//! IE-derived device signatures and cross-state signature pairing.

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use crate::capture::{FrameKind, InformationElement, ManagementFrame};
use crate::error::SignatureError;

/// Canonical fingerprint of a frame's IE list. The `canonical` string is the
/// display-filter syntax: tags in on-air order, vendor tags as
/// `221(0xOUI,TYPE)`, HT capability detail appended when tag 45 is present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeviceSignature {
    pub ie_tags: Vec<u8>,
    pub vendor_entries: Vec<([u8; 3], u8)>,
    pub htcap: Option<u16>,
    pub htagg: Option<u8>,
    pub htmcs: Option<u32>,
    pub canonical: String,
}

impl DeviceSignature {
    pub fn empty() -> Self {
        Self::from_ies(&[])
    }

    pub fn from_ies(ies: &[InformationElement]) -> Self {
        let mut parts: Vec<String> = Vec::with_capacity(ies.len());
        let mut ie_tags = Vec::with_capacity(ies.len());
        let mut vendor_entries = Vec::new();
        let mut htcap = None;
        let mut htagg = None;
        let mut htmcs = None;

        for ie in ies {
            ie_tags.push(ie.tag);
            if ie.tag == 221 {
                if let (Some(oui), Some(vt)) = (ie.vendor_oui, ie.vendor_type) {
                    vendor_entries.push((oui, vt));
                    let oui_num =
                        ((oui[0] as u32) << 16) | ((oui[1] as u32) << 8) | oui[2] as u32;
                    parts.push(format!("221(0x{oui_num:x},{vt})"));
                    continue;
                }
            }
            parts.push(ie.tag.to_string());
            if ie.tag == 45 && htcap.is_none() {
                // HT capability info is little-endian on air; rendered as a
                // big-endian hex number.
                if ie.value.len() >= 2 {
                    htcap = Some(LittleEndian::read_u16(&ie.value[0..2]));
                }
                if ie.value.len() >= 3 {
                    htagg = Some(ie.value[2]);
                }
                if ie.value.len() >= 7 {
                    htmcs = Some(LittleEndian::read_u32(&ie.value[3..7]));
                }
            }
        }

        let mut canonical = parts.join(",");
        if let Some(cap) = htcap {
            canonical.push_str(&format!(",htcap:{cap:04x}"));
        }
        if let Some(agg) = htagg {
            canonical.push_str(&format!(",htagg:{agg:02x}"));
        }
        if let Some(mcs) = htmcs {
            canonical.push_str(&format!(",htmcs:{mcs:08x}"));
        }

        Self {
            ie_tags,
            vendor_entries,
            htcap,
            htagg,
            htmcs,
            canonical,
        }
    }
}

pub fn derive_signature(frame: &ManagementFrame) -> Result<DeviceSignature, SignatureError> {
    match frame.kind {
        FrameKind::ProbeRequest
        | FrameKind::Association
        | FrameKind::Authentication
        | FrameKind::Beacon => Ok(DeviceSignature::from_ies(&frame.ies)),
        other => Err(SignatureError::WrongFrameKind(other)),
    }
}

pub fn signature_match(a: &DeviceSignature, b: &DeviceSignature) -> bool {
    a.canonical == b.canonical
}

/// A learned (global-state, randomized-state) signature pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignaturePair {
    pub global: String,
    pub random: String,
}

/// Mines (Sig_G, Sig_R) pairs from records whose global/random link has been
/// established. Pairs are deduplicated and sorted for determinism.
pub fn signature_pairs(catalog: &[crate::classify::DeviceRecord]) -> Vec<SignaturePair> {
    let mut pairs = std::collections::BTreeSet::new();
    for rec in catalog {
        if !rec.linked {
            continue;
        }
        for g in &rec.signatures_global {
            for r in &rec.signatures_random {
                if g != r {
                    pairs.insert((g.clone(), r.clone()));
                }
            }
        }
    }
    pairs
        .into_iter()
        .map(|(global, random)| SignaturePair { global, random })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::InformationElement;

    /// The Moto E2 global-state probe IE layout.
    pub fn moto_e2_global_ies() -> Vec<InformationElement> {
        vec![
            InformationElement::new(0, vec![]),
            InformationElement::new(1, vec![0x82, 0x84, 0x8B, 0x96]),
            InformationElement::new(50, vec![0x0C, 0x12, 0x18, 0x24]),
            InformationElement::new(3, vec![0x06]),
            InformationElement::new(45, vec![0x2C, 0x01, 0x03, 0xFF, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00]),
            InformationElement::new(221, vec![0x00, 0x50, 0xF2, 0x08, 0x00, 0x13]),
        ]
    }

    #[test]
    fn moto_e2_global_signature() {
        let sig = DeviceSignature::from_ies(&moto_e2_global_ies());
        assert_eq!(
            sig.canonical,
            "0,1,50,3,45,221(0x50f2,8),htcap:012c,htagg:03,htmcs:000000ff"
        );
    }

    #[test]
    fn moto_e2_random_signature() {
        let ies = vec![
            InformationElement::new(0, vec![]),
            InformationElement::new(1, vec![0x82, 0x84]),
            InformationElement::new(50, vec![0x0C]),
        ];
        assert_eq!(DeviceSignature::from_ies(&ies).canonical, "0,1,50");
    }

    #[test]
    fn zero_ies_empty_canonical() {
        assert_eq!(DeviceSignature::from_ies(&[]).canonical, "");
    }

    #[test]
    fn match_is_string_equality() {
        let g = DeviceSignature::from_ies(&moto_e2_global_ies());
        let r = DeviceSignature::from_ies(&[InformationElement::new(0, vec![])]);
        assert!(signature_match(&g, &g.clone()));
        assert!(!signature_match(&g, &r));
        assert!(signature_match(&DeviceSignature::empty(), &DeviceSignature::empty()));
    }

    #[test]
    fn duplicate_vendor_tags_kept_in_order() {
        let ies = vec![
            InformationElement::new(221, vec![0x00, 0x50, 0xF2, 0x08]),
            InformationElement::new(221, vec![0x50, 0x6F, 0x9A, 0x0A]),
        ];
        let sig = DeviceSignature::from_ies(&ies);
        assert_eq!(sig.canonical, "221(0x50f2,8),221(0x506f9a,10)");
    }

    #[test]
    fn signature_ignores_frame_metadata() {
        use crate::frames::build_probe_request;
        let ies = moto_e2_global_ies();
        let f1 = crate::capture::parse_frame_at(
            &build_probe_request("DA:A1:19:00:00:01".parse().unwrap(), 10, &ies),
            111,
        )
        .unwrap();
        let f2 = crate::capture::parse_frame_at(
            &build_probe_request("92:68:C3:00:00:02".parse().unwrap(), 999, &ies),
            222,
        )
        .unwrap();
        assert_eq!(derive_signature(&f1).unwrap(), derive_signature(&f2).unwrap());
    }

    #[test]
    fn wrong_frame_kind_rejected() {
        let f = crate::capture::parse_frame(&crate::frames::build_cts(
            "AA:BB:CC:00:00:01".parse().unwrap(),
            0,
        ))
        .unwrap();
        assert!(derive_signature(&f).is_err());
    }
}

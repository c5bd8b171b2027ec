//! 802.11 frame parsing: frame control decode, address/sequence extraction,
//! tagged-parameter (IE) walking, WPS attribute TLVs.

use byteorder::{BigEndian, ByteOrder, LittleEndian};

use crate::address::MacAddress;
use crate::error::{FrameError, WpsError};
use crate::pcap::RawCapture;

pub const WPS_OUI: [u8; 3] = [0x00, 0x50, 0xF2];
pub const WPS_VENDOR_TYPE: u8 = 4;
pub const WIFI_DIRECT_OUI: [u8; 3] = [0x50, 0x6F, 0x9A];
pub const WIFI_DIRECT_TYPE: u8 = 10;
pub const NINTENDO_OUI: [u8; 3] = [0x00, 0x1F, 0x32];
pub const APPLE_OUI: [u8; 3] = [0x00, 0x17, 0xF2];
/// Apple vendor IE subtype carrying the Bluetooth MAC in hotspot beacons.
pub const APPLE_TYPE6: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FrameKind {
    ProbeRequest,
    ProbeResponse,
    Beacon,
    Authentication,
    Association,
    Deauthentication,
    Atim,
    Rts,
    Cts,
    CfEnd,
    CfEndCfAck,
    Data,
}

impl FrameKind {
    pub fn is_management(&self) -> bool {
        !matches!(
            self,
            FrameKind::Rts | FrameKind::Cts | FrameKind::CfEnd | FrameKind::CfEndCfAck | FrameKind::Data
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct InformationElement {
    pub tag: u8,
    pub value: Vec<u8>,
    /// Set iff tag = 221 and the value holds at least OUI + type byte.
    pub vendor_oui: Option<[u8; 3]>,
    pub vendor_type: Option<u8>,
}

impl InformationElement {
    pub fn new(tag: u8, value: Vec<u8>) -> Self {
        let (vendor_oui, vendor_type) = if tag == 221 && value.len() >= 4 {
            (Some([value[0], value[1], value[2]]), Some(value[3]))
        } else {
            (None, None)
        };
        Self {
            tag,
            value,
            vendor_oui,
            vendor_type,
        }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn vendor(&self, oui: [u8; 3], vendor_type: u8) -> bool {
        self.vendor_oui == Some(oui) && self.vendor_type == Some(vendor_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ManagementFrame {
    pub kind: FrameKind,
    /// Absent for CTS frames, which carry no transmitter address.
    pub source: Option<MacAddress>,
    pub destination: MacAddress,
    /// 12-bit sequence number; 0 for control frames, which have none.
    pub sequence_number: u16,
    /// NAV duration field in microseconds.
    pub duration: u16,
    pub ssid: Option<Vec<u8>>,
    pub ies: Vec<InformationElement>,
    pub timestamp: u64,
}

impl ManagementFrame {
    pub fn find_ie(&self, tag: u8) -> Option<&InformationElement> {
        self.ies.iter().find(|ie| ie.tag == tag)
    }

    pub fn find_vendor(&self, oui: [u8; 3], vendor_type: u8) -> Option<&InformationElement> {
        self.ies.iter().find(|ie| ie.vendor(oui, vendor_type))
    }
}

/// Trailing bytes tolerated after the last complete IE (an undetected FCS
/// plus a spare header never exceeds this).
const IE_TRAILER_TOLERANCE: usize = 6;

pub fn parse_frame(payload: &[u8]) -> Result<ManagementFrame, FrameError> {
    parse_frame_at(payload, 0)
}

pub fn parse_frame_at(payload: &[u8], timestamp: u64) -> Result<ManagementFrame, FrameError> {
    if payload.len() < 10 {
        return Err(FrameError::TooShort(payload.len()));
    }
    let fc = LittleEndian::read_u16(&payload[0..2]);
    let ftype = (fc >> 2) & 0x3;
    let subtype = (fc >> 4) & 0xF;

    match ftype {
        0 => parse_management(payload, subtype, timestamp),
        1 => parse_control(payload, subtype, timestamp),
        _ => parse_data(payload, timestamp),
    }
}

fn addr(payload: &[u8], off: usize) -> MacAddress {
    MacAddress::from_slice(&payload[off..off + 6]).unwrap()
}

fn parse_control(payload: &[u8], subtype: u16, timestamp: u64) -> Result<ManagementFrame, FrameError> {
    let duration = LittleEndian::read_u16(&payload[2..4]);
    let destination = addr(payload, 4);
    let (kind, needs_ta) = match subtype {
        11 => (FrameKind::Rts, true),
        12 => (FrameKind::Cts, false),
        14 => (FrameKind::CfEnd, true),
        15 => (FrameKind::CfEndCfAck, true),
        _ => (FrameKind::Data, false),
    };
    let source = if needs_ta {
        if payload.len() < 16 {
            return Err(FrameError::MalformedFrame("control frame missing TA"));
        }
        Some(addr(payload, 10))
    } else {
        None
    };
    Ok(ManagementFrame {
        kind,
        source,
        destination,
        sequence_number: 0,
        duration,
        ssid: None,
        ies: Vec::new(),
        timestamp,
    })
}

fn parse_data(payload: &[u8], timestamp: u64) -> Result<ManagementFrame, FrameError> {
    if payload.len() < 24 {
        return Err(FrameError::MalformedFrame("data frame shorter than MAC header"));
    }
    let seq = LittleEndian::read_u16(&payload[22..24]) >> 4;
    Ok(ManagementFrame {
        kind: FrameKind::Data,
        source: Some(addr(payload, 10)),
        destination: addr(payload, 4),
        sequence_number: seq,
        duration: LittleEndian::read_u16(&payload[2..4]),
        ssid: None,
        ies: Vec::new(),
        timestamp,
    })
}

fn parse_management(payload: &[u8], subtype: u16, timestamp: u64) -> Result<ManagementFrame, FrameError> {
    if payload.len() < 24 {
        return Err(FrameError::MalformedFrame("management frame shorter than MAC header"));
    }
    let destination = addr(payload, 4);
    let source = addr(payload, 10);
    let seq = LittleEndian::read_u16(&payload[22..24]) >> 4;

    // Fixed-parameter length preceding the tagged region, per subtype.
    let (kind, fixed) = match subtype {
        0 => (FrameKind::Association, 4),  // assoc request: cap + listen interval
        1 => (FrameKind::Association, 6),  // assoc response
        2 => (FrameKind::Association, 10), // reassoc request
        4 => (FrameKind::ProbeRequest, 0),
        5 => (FrameKind::ProbeResponse, 12),
        8 => (FrameKind::Beacon, 12),
        9 => (FrameKind::Atim, 0),
        11 => (FrameKind::Authentication, 6),
        12 => (FrameKind::Deauthentication, 2),
        _ => (FrameKind::Data, 0),
    };

    let mut ies = Vec::new();
    let mut ssid = None;
    if kind != FrameKind::Data && kind != FrameKind::Deauthentication {
        let ie_start = 24 + fixed;
        if ie_start > payload.len() {
            return Err(FrameError::MalformedFrame("fixed parameters overrun payload"));
        }
        ies = parse_ies(&payload[ie_start..])?;
        ssid = ies.iter().find(|ie| ie.tag == 0).map(|ie| ie.value.clone());
    }

    Ok(ManagementFrame {
        kind,
        source: Some(source),
        destination,
        sequence_number: seq,
        duration: LittleEndian::read_u16(&payload[2..4]),
        ssid,
        ies,
        timestamp,
    })
}

/// Walks the tagged-parameter region. Stops at the last complete IE when only
/// a short trailer remains (undetected FCS / garbage); a declared length
/// overrunning with more than the tolerance left rejects the frame.
pub fn parse_ies(mut region: &[u8]) -> Result<Vec<InformationElement>, FrameError> {
    let mut ies = Vec::new();
    loop {
        if region.len() < 2 {
            if region.len() > IE_TRAILER_TOLERANCE {
                return Err(FrameError::MalformedFrame("dangling IE header"));
            }
            break;
        }
        let tag = region[0];
        let len = region[1] as usize;
        if 2 + len > region.len() {
            if region.len() <= IE_TRAILER_TOLERANCE {
                break;
            }
            return Err(FrameError::MalformedFrame("IE length overruns payload"));
        }
        ies.push(InformationElement::new(tag, region[2..2 + len].to_vec()));
        region = &region[2 + len..];
    }
    Ok(ies)
}

/// Serializes an IE list back to a tagged-parameter region.
pub fn encode_ies(ies: &[InformationElement]) -> Vec<u8> {
    let mut out = Vec::new();
    for ie in ies {
        out.push(ie.tag);
        out.push(ie.value.len() as u8);
        out.extend_from_slice(&ie.value);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WpsAttributes {
    pub manufacturer: Option<String>,
    pub model_name: Option<String>,
    pub model_number: Option<String>,
    pub uuid_e: Option<[u8; 16]>,
    /// True when a TLV length overran the IE; fields parsed before the
    /// overrun are retained.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub tlv_overrun: bool,
}

const WPS_ATTR_MANUFACTURER: u16 = 0x1021;
const WPS_ATTR_MODEL_NAME: u16 = 0x1023;
const WPS_ATTR_MODEL_NUMBER: u16 = 0x1024;
const WPS_ATTR_UUID_E: u16 = 0x1047;

pub fn parse_wps(ie: &InformationElement) -> Result<WpsAttributes, WpsError> {
    if !ie.vendor(WPS_OUI, WPS_VENDOR_TYPE) {
        return Err(WpsError::NotWps);
    }
    let mut attrs = WpsAttributes::default();
    let mut body = &ie.value[4..];
    while body.len() >= 4 {
        let id = BigEndian::read_u16(&body[0..2]);
        let len = BigEndian::read_u16(&body[2..4]) as usize;
        if 4 + len > body.len() {
            attrs.tlv_overrun = true;
            return Ok(attrs);
        }
        let value = &body[4..4 + len];
        match id {
            WPS_ATTR_MANUFACTURER => attrs.manufacturer = Some(String::from_utf8_lossy(value).into_owned()),
            WPS_ATTR_MODEL_NAME => attrs.model_name = Some(String::from_utf8_lossy(value).into_owned()),
            WPS_ATTR_MODEL_NUMBER => attrs.model_number = Some(String::from_utf8_lossy(value).into_owned()),
            WPS_ATTR_UUID_E if len == 16 => {
                let mut u = [0u8; 16];
                u.copy_from_slice(value);
                attrs.uuid_e = Some(u);
            }
            _ => {} // unknown attributes skipped by length
        }
        body = &body[4 + len..];
    }
    if !body.is_empty() {
        attrs.tlv_overrun = true;
    }
    Ok(attrs)
}

/// Builds a WPS vendor IE from attribute values; inverse of [`parse_wps`].
pub fn encode_wps(attrs: &WpsAttributes) -> InformationElement {
    let mut v = Vec::new();
    v.extend_from_slice(&WPS_OUI);
    v.push(WPS_VENDOR_TYPE);
    let mut push_tlv = |id: u16, value: &[u8]| {
        v.extend_from_slice(&id.to_be_bytes());
        v.extend_from_slice(&(value.len() as u16).to_be_bytes());
        v.extend_from_slice(value);
    };
    if let Some(m) = &attrs.manufacturer {
        push_tlv(WPS_ATTR_MANUFACTURER, m.as_bytes());
    }
    if let Some(m) = &attrs.model_name {
        push_tlv(WPS_ATTR_MODEL_NAME, m.as_bytes());
    }
    if let Some(m) = &attrs.model_number {
        push_tlv(WPS_ATTR_MODEL_NUMBER, m.as_bytes());
    }
    if let Some(u) = &attrs.uuid_e {
        push_tlv(WPS_ATTR_UUID_E, u);
    }
    InformationElement::new(221, v)
}

/// Extracts WPS attributes from a frame, if a WPS vendor IE is present.
pub fn frame_wps(frame: &ManagementFrame) -> Option<WpsAttributes> {
    frame
        .find_vendor(WPS_OUI, WPS_VENDOR_TYPE)
        .and_then(|ie| parse_wps(ie).ok())
}

/// Parses every frame of a capture. Malformed frames are counted, not fatal.
pub fn parse_all(cap: &RawCapture) -> (Vec<ManagementFrame>, usize) {
    let mut frames = Vec::with_capacity(cap.frames.len());
    let mut malformed = 0usize;
    for (ts, payload) in &cap.frames {
        match parse_frame_at(payload, *ts) {
            Ok(f) => frames.push(f),
            Err(_) => malformed += 1,
        }
    }
    (frames, malformed)
}

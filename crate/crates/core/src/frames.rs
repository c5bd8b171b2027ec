//! 802.11 frame builders: byte-level construction of the management and
//! control frames the simulator and responder emit.

use byteorder::{ByteOrder, LittleEndian};

use crate::address::MacAddress;
use crate::capture::{encode_ies, InformationElement};

fn frame_control(ftype: u16, subtype: u16) -> u16 {
    (ftype << 2) | (subtype << 4)
}

fn mgmt_header(subtype: u16, dst: MacAddress, src: MacAddress, bssid: MacAddress, seq: u16) -> Vec<u8> {
    let mut out = vec![0u8; 24];
    LittleEndian::write_u16(&mut out[0..2], frame_control(0, subtype));
    out[4..10].copy_from_slice(dst.as_bytes());
    out[10..16].copy_from_slice(src.as_bytes());
    out[16..22].copy_from_slice(bssid.as_bytes());
    LittleEndian::write_u16(&mut out[22..24], (seq & 0x0FFF) << 4);
    out
}

pub fn build_probe_request(src: MacAddress, seq: u16, ies: &[InformationElement]) -> Vec<u8> {
    let mut out = mgmt_header(4, MacAddress::BROADCAST, src, MacAddress::BROADCAST, seq);
    out.extend_from_slice(&encode_ies(ies));
    out
}

pub fn build_authentication(src: MacAddress, dst: MacAddress, seq: u16) -> Vec<u8> {
    let mut out = mgmt_header(11, dst, src, dst, seq);
    out.extend_from_slice(&[0, 0, 1, 0, 0, 0]); // open system, auth seq 1, success
    out
}

pub fn build_association(src: MacAddress, dst: MacAddress, seq: u16, ies: &[InformationElement]) -> Vec<u8> {
    let mut out = mgmt_header(0, dst, src, dst, seq);
    out.extend_from_slice(&[0x01, 0x00, 0x0A, 0x00]); // capability, listen interval
    out.extend_from_slice(&encode_ies(ies));
    out
}

pub fn build_beacon(src: MacAddress, seq: u16, ies: &[InformationElement]) -> Vec<u8> {
    let mut out = mgmt_header(8, MacAddress::BROADCAST, src, src, seq);
    out.extend_from_slice(&[0u8; 12]); // timestamp, beacon interval, capability
    out.extend_from_slice(&encode_ies(ies));
    out
}

pub fn build_data(src: MacAddress, dst: MacAddress, seq: u16) -> Vec<u8> {
    let mut out = vec![0u8; 24];
    LittleEndian::write_u16(&mut out[0..2], frame_control(2, 0));
    out[4..10].copy_from_slice(dst.as_bytes());
    out[10..16].copy_from_slice(src.as_bytes());
    out[16..22].copy_from_slice(dst.as_bytes());
    LittleEndian::write_u16(&mut out[22..24], (seq & 0x0FFF) << 4);
    out
}

pub fn build_rts(src: MacAddress, dst: MacAddress, duration: u16) -> Vec<u8> {
    let mut out = vec![0u8; 16];
    LittleEndian::write_u16(&mut out[0..2], frame_control(1, 11));
    LittleEndian::write_u16(&mut out[2..4], duration);
    out[4..10].copy_from_slice(dst.as_bytes());
    out[10..16].copy_from_slice(src.as_bytes());
    out
}

/// CTS carries only a receiver address; 10 bytes total.
pub fn build_cts(dst: MacAddress, duration: u16) -> Vec<u8> {
    let mut out = vec![0u8; 10];
    LittleEndian::write_u16(&mut out[0..2], frame_control(1, 12));
    LittleEndian::write_u16(&mut out[2..4], duration);
    out[4..10].copy_from_slice(dst.as_bytes());
    out
}

/// Apple hotspot beacon vendor IE: subtype 6 with the Bluetooth MAC payload.
pub fn apple_type6_ie(bluetooth: MacAddress) -> InformationElement {
    let mut v = Vec::with_capacity(10);
    v.extend_from_slice(&crate::capture::APPLE_OUI);
    v.push(crate::capture::APPLE_TYPE6);
    v.extend_from_slice(bluetooth.as_bytes());
    InformationElement::new(221, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::{parse_frame, FrameKind};

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    #[test]
    fn rts_round_trip() {
        let bytes = build_rts(mac("02:00:00:00:00:01"), mac("AA:BB:CC:00:00:01"), 100);
        let f = parse_frame(&bytes).unwrap();
        assert_eq!(f.kind, FrameKind::Rts);
        assert_eq!(f.source, Some(mac("02:00:00:00:00:01")));
        assert_eq!(f.destination, mac("AA:BB:CC:00:00:01"));
    }

    #[test]
    fn auth_round_trip() {
        let bytes = build_authentication(mac("90:68:C3:00:00:01"), mac("00:40:96:00:00:01"), 4095);
        let f = parse_frame(&bytes).unwrap();
        assert_eq!(f.kind, FrameKind::Authentication);
        assert_eq!(f.sequence_number, 4095);
    }

    #[test]
    fn beacon_with_type6() {
        let ie = apple_type6_ie(mac("D0:11:22:33:44:55"));
        let bytes = build_beacon(mac("D2:11:22:33:44:54"), 1, &[ie.clone()]);
        let f = parse_frame(&bytes).unwrap();
        assert_eq!(f.kind, FrameKind::Beacon);
        assert_eq!(f.find_vendor(crate::capture::APPLE_OUI, 6), Some(&ie));
    }
}

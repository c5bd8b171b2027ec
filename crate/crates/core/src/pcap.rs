//! Minimal pcap reader/writer for LINKTYPE_IEEE802_11 (105) and
//! LINKTYPE_IEEE802_11_RADIOTAP (127). Both endiannesses and the
//! nanosecond magic are accepted; timestamps normalize to microseconds.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian};

use crate::error::CaptureError;

pub const LINKTYPE_IEEE802_11: u32 = 105;
pub const LINKTYPE_RADIOTAP: u32 = 127;

const MAGIC_USEC: u32 = 0xA1B2_C3D4;
const MAGIC_NSEC: u32 = 0xA1B2_3C4D;

/// A loaded capture file: link type plus raw 802.11 payloads in file order,
/// radiotap headers already stripped.
#[derive(Debug, Clone)]
pub struct RawCapture {
    pub link_type: u32,
    /// (timestamp in microseconds since epoch, 802.11 frame bytes)
    pub frames: Vec<(u64, Vec<u8>)>,
}

pub fn load_capture(path: &Path) -> Result<RawCapture, CaptureError> {
    let mut file = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf)?;
    parse_capture(&buf)
}

pub fn parse_capture(buf: &[u8]) -> Result<RawCapture, CaptureError> {
    if buf.len() < 24 {
        return Err(CaptureError::TruncatedHeader);
    }
    let magic_le = LittleEndian::read_u32(&buf[0..4]);
    let (swapped, nanos) = match magic_le {
        MAGIC_USEC => (false, false),
        MAGIC_NSEC => (false, true),
        m if m.swap_bytes() == MAGIC_USEC => (true, false),
        m if m.swap_bytes() == MAGIC_NSEC => (true, true),
        m => return Err(CaptureError::BadMagic(m)),
    };
    let rd32 = |b: &[u8]| -> u32 {
        let v = LittleEndian::read_u32(b);
        if swapped {
            v.swap_bytes()
        } else {
            v
        }
    };
    let link_type = rd32(&buf[20..24]);
    if link_type != LINKTYPE_IEEE802_11 && link_type != LINKTYPE_RADIOTAP {
        return Err(CaptureError::UnsupportedLinkType(link_type));
    }

    let mut frames = Vec::new();
    let mut off = 24;
    let mut index = 0usize;
    while off < buf.len() {
        if off + 16 > buf.len() {
            return Err(CaptureError::TruncatedRecord { index });
        }
        let ts_sec = rd32(&buf[off..off + 4]) as u64;
        let ts_frac = rd32(&buf[off + 4..off + 8]) as u64;
        let incl_len = rd32(&buf[off + 8..off + 12]) as usize;
        off += 16;
        if off + incl_len > buf.len() {
            return Err(CaptureError::TruncatedRecord { index });
        }
        let ts_us = if nanos {
            ts_sec * 1_000_000 + ts_frac / 1_000
        } else {
            ts_sec * 1_000_000 + ts_frac
        };
        let mut payload = &buf[off..off + incl_len];
        if link_type == LINKTYPE_RADIOTAP {
            // Skip the radiotap header by its declared length; no field decoding.
            if payload.len() < 4 {
                return Err(CaptureError::TruncatedRecord { index });
            }
            let rt_len = LittleEndian::read_u16(&payload[2..4]) as usize;
            if rt_len > payload.len() {
                return Err(CaptureError::TruncatedRecord { index });
            }
            payload = &payload[rt_len..];
        }
        frames.push((ts_us, payload.to_vec()));
        off += incl_len;
        index += 1;
    }
    Ok(RawCapture {
        link_type,
        frames,
    })
}

/// Writes a microsecond-precision little-endian pcap with the given link type.
pub struct PcapWriter<W: Write> {
    out: W,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(mut out: W, link_type: u32) -> std::io::Result<Self> {
        let mut hdr = [0u8; 24];
        LittleEndian::write_u32(&mut hdr[0..4], MAGIC_USEC);
        LittleEndian::write_u16(&mut hdr[4..6], 2);
        LittleEndian::write_u16(&mut hdr[6..8], 4);
        LittleEndian::write_u32(&mut hdr[16..20], 65535); // snaplen
        LittleEndian::write_u32(&mut hdr[20..24], link_type);
        out.write_all(&hdr)?;
        Ok(Self { out })
    }

    pub fn write_frame(&mut self, ts_us: u64, payload: &[u8]) -> std::io::Result<()> {
        let mut rec = [0u8; 16];
        LittleEndian::write_u32(&mut rec[0..4], (ts_us / 1_000_000) as u32);
        LittleEndian::write_u32(&mut rec[4..8], (ts_us % 1_000_000) as u32);
        LittleEndian::write_u32(&mut rec[8..12], payload.len() as u32);
        LittleEndian::write_u32(&mut rec[12..16], payload.len() as u32);
        self.out.write_all(&rec)?;
        self.out.write_all(payload)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_pcap_loads_zero_frames() {
        let w = PcapWriter::new(Vec::new(), LINKTYPE_IEEE802_11).unwrap();
        let bytes = w.into_inner();
        let cap = parse_capture(&bytes).unwrap();
        assert_eq!(cap.frames.len(), 0);
        assert_eq!(cap.link_type, 105);
    }

    #[test]
    fn unsupported_link_type() {
        let w = PcapWriter::new(Vec::new(), 148).unwrap();
        let bytes = w.into_inner();
        match parse_capture(&bytes) {
            Err(CaptureError::UnsupportedLinkType(148)) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn truncated_record_reports_index() {
        let mut w = PcapWriter::new(Vec::new(), LINKTYPE_IEEE802_11).unwrap();
        w.write_frame(1, &[0u8; 10]).unwrap();
        let mut bytes = w.into_inner();
        // Declare a longer record than the remaining bytes.
        let tail = bytes.len();
        bytes.extend_from_slice(&[0u8; 16]);
        LittleEndian::write_u32(&mut bytes[tail + 8..tail + 12], 100);
        match parse_capture(&bytes) {
            Err(CaptureError::TruncatedRecord { index: 1 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn radiotap_header_skipped() {
        let mut w = PcapWriter::new(Vec::new(), LINKTYPE_RADIOTAP).unwrap();
        // 8-byte radiotap header (version 0, len 8) then a dummy 802.11 body.
        let mut payload = vec![0, 0, 8, 0, 0, 0, 0, 0];
        payload.extend_from_slice(&[0x40, 0, 0, 0, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF]);
        w.write_frame(5, &payload).unwrap();
        let cap = parse_capture(&w.into_inner()).unwrap();
        assert_eq!(cap.frames.len(), 1);
        assert_eq!(cap.frames[0].1[0], 0x40);
    }

    #[test]
    fn big_endian_and_nanosecond_magics() {
        // Hand-build a big-endian nanosecond pcap with one empty record.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&MAGIC_NSEC.to_be_bytes());
        bytes.extend_from_slice(&2u16.to_be_bytes());
        bytes.extend_from_slice(&4u16.to_be_bytes());
        bytes.extend_from_slice(&[0u8; 8]);
        bytes.extend_from_slice(&65535u32.to_be_bytes());
        bytes.extend_from_slice(&105u32.to_be_bytes());
        bytes.extend_from_slice(&3u32.to_be_bytes()); // ts_sec
        bytes.extend_from_slice(&500_000u32.to_be_bytes()); // ts_nsec
        bytes.extend_from_slice(&0u32.to_be_bytes());
        bytes.extend_from_slice(&0u32.to_be_bytes());
        let cap = parse_capture(&bytes).unwrap();
        assert_eq!(cap.frames[0].0, 3_000_500); // ns normalized to us
    }
}

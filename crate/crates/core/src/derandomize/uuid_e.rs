//! WPS UUID-E construction: an RFC 4122 version-5 UUID computed by SHA-1
//! over a fixed namespace nonce followed by the 6-byte MAC address. The
//! nonce matches the wpa_supplicant `uuid_gen_mac_addr` implementation,
//! which is what makes the value precomputable and reversible.

use sha1::{Digest, Sha1};

use crate::address::MacAddress;

/// Namespace nonce from wpa_supplicant's UUID generation.
pub const WPS_UUID_NAMESPACE: [u8; 16] = [
    0x52, 0x64, 0x80, 0xf8, 0xc9, 0x9b, 0x4b, 0xe5, 0xa6, 0x55, 0x58, 0xed, 0x5f, 0x5d, 0x60,
    0x84,
];

/// The example UUID shipped in wpa_supplicant.conf, observed identically on
/// many HTC devices. A table hit on this value identifies a shared UUID-E,
/// not a device.
pub const DEGENERATE_UUID_E: [u8; 16] = [
    0x12, 0x34, 0x56, 0x78, 0x9a, 0xbc, 0xde, 0xf0, 0x12, 0x34, 0x56, 0x78, 0x9a, 0xbc, 0xde,
    0xf0,
];

pub fn uuid_e_from_mac(mac: MacAddress) -> [u8; 16] {
    let mut h = Sha1::new();
    h.update(WPS_UUID_NAMESPACE);
    h.update(mac.as_bytes());
    let digest = h.finalize();
    let mut uuid = [0u8; 16];
    uuid.copy_from_slice(&digest[..16]);
    // version 5 (name-based, SHA-1)
    uuid[6] = (5 << 4) | (uuid[6] & 0x0f);
    // RFC 4122 variant
    uuid[8] = 0x80 | (uuid[8] & 0x3f);
    uuid
}

pub fn is_degenerate(uuid: &[u8; 16]) -> bool {
    *uuid == DEGENERATE_UUID_E
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_mac_sensitive() {
        let a: MacAddress = "90:68:C3:12:34:56".parse().unwrap();
        let b: MacAddress = "90:68:C3:12:34:57".parse().unwrap();
        assert_eq!(uuid_e_from_mac(a), uuid_e_from_mac(a));
        assert_ne!(uuid_e_from_mac(a), uuid_e_from_mac(b));
    }

    #[test]
    fn version_and_variant_bits() {
        let u = uuid_e_from_mac("00:11:22:33:44:55".parse().unwrap());
        assert_eq!(u[6] >> 4, 5);
        assert_eq!(u[8] & 0xC0, 0x80);
    }
}

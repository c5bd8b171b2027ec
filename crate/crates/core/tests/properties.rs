//! Property-based tests over the parsing and address primitives.

use proptest::prelude::*;

use macrand::address::{classify_bits, strip_local_bit, AddressClass, MacAddress};
use macrand::capture::{parse_frame, FrameKind, InformationElement};
use macrand::frames::{build_authentication, build_probe_request, build_rts};
use macrand::randtest;

fn arb_mac() -> impl Strategy<Value = MacAddress> {
    any::<[u8; 6]>().prop_map(MacAddress::new)
}

fn arb_ies() -> impl Strategy<Value = Vec<InformationElement>> {
    prop::collection::vec(
        (any::<u8>(), prop::collection::vec(any::<u8>(), 0..40))
            .prop_map(|(id, data)| InformationElement::new(id, data)),
        0..8,
    )
}

proptest! {
    // The parser must never panic and must never claim a frame shorter
    // than its own fixed header.
    #[test]
    fn parser_total_on_arbitrary_bytes(payload in prop::collection::vec(any::<u8>(), 0..300)) {
        if let Ok(frame) = parse_frame(&payload) {
            // Any accepted frame covers at least its own addresses:
            // 10 bytes for receiver-only control frames, 16 with a
            // transmitter, 24 for anything carrying a sequence number.
            prop_assert!(payload.len() >= 10);
            if frame.source.is_some() {
                prop_assert!(payload.len() >= 16);
            }
            if frame.sequence_number != 0 || matches!(frame.kind, FrameKind::ProbeRequest) {
                prop_assert!(payload.len() >= 24);
            }
            prop_assert!(frame.sequence_number < 4096);
        }
    }

    // Probe requests survive a build/parse round trip: source, sequence
    // number, and the IE list all come back intact.
    #[test]
    fn probe_request_round_trip(src in arb_mac(), seq in 0u16..4096, ies in arb_ies()) {
        let bytes = build_probe_request(src, seq, &ies);
        let frame = parse_frame(&bytes).unwrap();
        prop_assert_eq!(frame.kind, FrameKind::ProbeRequest);
        prop_assert_eq!(frame.source, Some(src));
        prop_assert_eq!(frame.sequence_number, seq);
        prop_assert_eq!(frame.ies, ies);
    }

    #[test]
    fn authentication_round_trip(src in arb_mac(), dst in arb_mac(), seq in 0u16..4096) {
        let bytes = build_authentication(src, dst, seq);
        let frame = parse_frame(&bytes).unwrap();
        prop_assert_eq!(frame.kind, FrameKind::Authentication);
        prop_assert_eq!(frame.source, Some(src));
        prop_assert_eq!(frame.destination, dst);
        prop_assert_eq!(frame.sequence_number, seq);
    }

    #[test]
    fn rts_round_trip(src in arb_mac(), dst in arb_mac(), duration in any::<u16>()) {
        let bytes = build_rts(src, dst, duration);
        let frame = parse_frame(&bytes).unwrap();
        prop_assert_eq!(frame.kind, FrameKind::Rts);
        prop_assert_eq!(frame.source, Some(src));
        prop_assert_eq!(frame.destination, dst);
        prop_assert_eq!(frame.duration, duration);
    }

    // strip_local_bit is idempotent and its output never classifies as
    // locally administered.
    #[test]
    fn strip_local_bit_idempotent(mac in arb_mac()) {
        let once = strip_local_bit(mac);
        prop_assert_eq!(strip_local_bit(once), once);
        prop_assert!(!once.is_local());
        // Only bit 1 of the first octet may change.
        prop_assert_eq!(once.as_bytes()[0] & !0x02, mac.as_bytes()[0] & !0x02);
        prop_assert_eq!(&once.as_bytes()[1..], &mac.as_bytes()[1..]);
    }

    // Bit-level classification is a partition: exactly one class per
    // address, consistent with the two header bits.
    #[test]
    fn classify_bits_partition(mac in arb_mac()) {
        let class = classify_bits(mac);
        let expected = if mac.is_multicast() {
            AddressClass::Multicast
        } else if mac.is_local() {
            AddressClass::LocalUnicast
        } else {
            AddressClass::GlobalUnicast
        };
        prop_assert_eq!(class, expected);
    }

    // The randomness bitstream uses exactly 46 bits per address and
    // ignores the multicast/local bits entirely.
    #[test]
    fn mac_bitstream_masks_admin_bits(macs in prop::collection::vec(arb_mac(), 0..50)) {
        let bits = randtest::mac_bitstream(&macs);
        prop_assert_eq!(bits.len(), macs.len() * 46);
        let flipped: Vec<MacAddress> = macs
            .iter()
            .map(|m| {
                let mut b = *m.as_bytes();
                b[0] ^= 0x03;
                MacAddress::new(b)
            })
            .collect();
        prop_assert_eq!(randtest::mac_bitstream(&flipped), bits);
    }

    // to_u64/from_u64 round trip.
    #[test]
    fn mac_u64_round_trip(mac in arb_mac()) {
        prop_assert_eq!(MacAddress::from_u64(mac.to_u64()), mac);
    }
}

//! Analysis toolkit for MAC address randomization in 802.11 probe traffic:
//! capture parsing, device fingerprinting, randomization classification,
//! derandomization attacks, randomness quality tests, and a ground-truth
//! trace synthesizer.

pub mod address;
pub mod capture;
pub mod catalog;
pub mod classify;
pub mod derandomize;
pub mod error;
pub mod frames;
pub mod pcap;
pub mod randtest;
pub mod signature;
pub mod simulate;

pub use address::{AddressClass, MacAddress, PrefixRegistry};
pub use capture::{FrameKind, InformationElement, ManagementFrame, WpsAttributes};
pub use classify::{Bin, ClassifyConfig, DeviceKey, DeviceRecord};
pub use signature::DeviceSignature;

//! Ground-truth trace synthesizer and the class-1 frame responder used by
//! the RTS/CTS presence attack.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::address::MacAddress;
use crate::capture::{FrameKind, InformationElement, ManagementFrame, WpsAttributes};
use crate::error::SimError;
use crate::frames;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    IosFullRandom,
    AndroidCid,
    MotorolaCid,
    MotorolaGlobalRandom,
    NoRandomization,
    WindowsLinuxAssociated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    ProbeBurst,
    ScreenOn,
    IncomingCall,
    Associate(String),
    HotspotBeacon,
    DirectedProbe(String),
}

/// Synthesizer description of one simulated device.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceScript {
    pub device_id: String,
    pub scheme: Scheme,
    pub global_mac: MacAddress,
    #[serde(default)]
    pub bluetooth_mac: Option<MacAddress>,
    /// IE layout probes carry when sourced from the global address.
    #[serde(default = "default_sig_global")]
    pub sig_global: Vec<InformationElement>,
    /// IE layout probes carry when sourced from a randomized address.
    #[serde(default = "default_sig_random")]
    pub sig_random: Vec<InformationElement>,
    #[serde(default)]
    pub wps: Option<WpsAttributes>,
    /// Time-ordered (microsecond timestamp, event) pairs.
    pub events: Vec<(u64, Event)>,
    #[serde(default = "default_lifetime")]
    pub rand_lifetime_s: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_lifetime() -> u64 {
    60
}

impl TraceScript {
    pub fn new(device_id: &str, scheme: Scheme, global_mac: MacAddress, seed: u64) -> Self {
        Self {
            device_id: device_id.to_string(),
            scheme,
            global_mac,
            bluetooth_mac: None,
            sig_global: default_sig_global(),
            sig_random: default_sig_random(),
            wps: None,
            events: Vec::new(),
            rand_lifetime_s: 60,
            seed,
        }
    }

    pub fn at(mut self, t_us: u64, event: Event) -> Self {
        self.events.push((t_us, event));
        self
    }
}

pub fn default_sig_global() -> Vec<InformationElement> {
    vec![
        InformationElement::new(0, vec![]),
        InformationElement::new(1, vec![0x82, 0x84, 0x8B, 0x96]),
        InformationElement::new(50, vec![0x0C, 0x12, 0x18, 0x24]),
        InformationElement::new(45, vec![0x2C, 0x01, 0x03, 0xFF, 0x00, 0x00, 0x00]),
    ]
}

pub fn default_sig_random() -> Vec<InformationElement> {
    vec![
        InformationElement::new(0, vec![]),
        InformationElement::new(1, vec![0x82, 0x84, 0x8B, 0x96]),
        InformationElement::new(50, vec![0x0C, 0x12, 0x18, 0x24]),
    ]
}

/// Gap between probes inside one burst.
pub const BURST_GAP_US: u64 = 20_000;
/// Auth-to-assoc spacing within an association exchange.
const ASSOC_STEP_US: u64 = 5_000;
/// Probes per burst: 3..=5, drawn per burst.
const BURST_MIN: usize = 3;
const BURST_MAX: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub device_id: String,
    pub scheme: Scheme,
    pub global_mac: MacAddress,
    pub addresses: Vec<MacAddress>,
    pub events: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    /// (timestamp µs, frame bytes), sorted by timestamp.
    pub frames: Vec<(u64, Vec<u8>)>,
    pub truth: Vec<GroundTruth>,
}

impl Synthesis {
    pub fn write_pcap(&self, path: &std::path::Path) -> std::io::Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut w = crate::pcap::PcapWriter::new(f, crate::pcap::LINKTYPE_IEEE802_11)?;
        for (ts, bytes) in &self.frames {
            w.write_frame(*ts, bytes)?;
        }
        use std::io::Write;
        w.into_inner().flush()
    }

    pub fn write_truth(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        let mut f = std::fs::File::create(path)?;
        for t in &self.truth {
            serde_json::to_writer(&mut f, t)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

struct DeviceSim<'a> {
    script: &'a TraceScript,
    rng: ChaCha8Rng,
    seq: u16,
    current_random: Option<(MacAddress, u64)>, // address, birth time
    stable_local: Option<MacAddress>,          // Windows/Linux locally assigned MAC
    addresses: BTreeSet<MacAddress>,
    out: Vec<(u64, Vec<u8>)>,
}

impl<'a> DeviceSim<'a> {
    fn new(script: &'a TraceScript) -> Self {
        Self {
            script,
            rng: ChaCha8Rng::seed_from_u64(script.seed),
            seq: 0,
            current_random: None,
            stable_local: None,
            addresses: BTreeSet::new(),
            out: Vec::new(),
        }
    }

    fn next_seq(&mut self) -> u16 {
        let s = self.seq;
        self.seq = (self.seq + 1) & 0x0FFF;
        s
    }

    fn fresh_random(&mut self) -> MacAddress {
        random_mac(self.script.scheme, self.script.global_mac, &mut self.rng)
    }

    /// Scheme-appropriate source address for an undirected probe at `now`,
    /// rotating randomized addresses past their lifetime.
    fn probe_source(&mut self, now: u64) -> MacAddress {
        match self.script.scheme {
            Scheme::NoRandomization => self.script.global_mac,
            Scheme::WindowsLinuxAssociated => self.local_identity(),
            Scheme::MotorolaGlobalRandom if self.rng.gen_ratio(1, 8) => {
                // occasional true-global frames slip out under this scheme
                self.script.global_mac
            }
            _ => {
                let lifetime = self.script.rand_lifetime_s * 1_000_000;
                match self.current_random {
                    Some((mac, birth)) if now.saturating_sub(birth) < lifetime => mac,
                    _ => {
                        let mac = self.fresh_random();
                        self.current_random = Some((mac, now));
                        mac
                    }
                }
            }
        }
    }

    /// The stable locally assigned MAC a Windows/Linux device uses for all
    /// traffic, probes and association alike.
    fn local_identity(&mut self) -> MacAddress {
        if let Some(mac) = self.stable_local {
            return mac;
        }
        let mut b = [0u8; 6];
        self.rng.fill(&mut b);
        b[0] = (b[0] & !0x01) | 0x02;
        let mac = MacAddress(b);
        self.stable_local = Some(mac);
        mac
    }

    fn sig_for(&self, src: MacAddress) -> &'a [InformationElement] {
        if src == self.script.global_mac {
            &self.script.sig_global
        } else {
            &self.script.sig_random
        }
    }

    fn probe_ies(&self, src: MacAddress, ssid: Option<&[u8]>) -> Vec<InformationElement> {
        let mut ies = self.sig_for(src).to_vec();
        if let Some(s) = ssid {
            if let Some(ie) = ies.iter_mut().find(|ie| ie.tag == 0) {
                *ie = InformationElement::new(0, s.to_vec());
            } else {
                ies.insert(0, InformationElement::new(0, s.to_vec()));
            }
        }
        if let Some(wps) = &self.script.wps {
            ies.push(crate::capture::encode_wps(wps));
        }
        ies
    }

    fn emit(&mut self, t: u64, src: Option<MacAddress>, bytes: Vec<u8>) {
        if let Some(s) = src {
            self.addresses.insert(s);
        }
        self.out.push((t, bytes));
    }

    fn burst(&mut self, t: u64, src: MacAddress, ssid: Option<&[u8]>) {
        let n = self.rng.gen_range(BURST_MIN..=BURST_MAX);
        let ies = self.probe_ies(src, ssid);
        for i in 0..n {
            let seq = self.next_seq();
            let bytes = frames::build_probe_request(src, seq, &ies);
            self.emit(t + i as u64 * BURST_GAP_US, Some(src), bytes);
        }
    }

    fn run(&mut self) {
        // Scripts may be built out of order; synthesis is time-ordered.
        let mut events = self.script.events.clone();
        events.sort_by_key(|(t, _)| *t);
        for (t, ev) in events {
            match ev {
                Event::ProbeBurst => {
                    let src = self.probe_source(t);
                    self.burst(t, src, None);
                }
                Event::ScreenOn | Event::IncomingCall => match self.script.scheme {
                    // the Android-lineage flaw: user interaction leaks the
                    // global address
                    Scheme::AndroidCid
                    | Scheme::MotorolaCid
                    | Scheme::MotorolaGlobalRandom
                    | Scheme::NoRandomization => {
                        self.burst(t, self.script.global_mac, None);
                    }
                    Scheme::IosFullRandom | Scheme::WindowsLinuxAssociated => {}
                },
                Event::DirectedProbe(ssid) => {
                    let src = self.probe_source(t);
                    let ssid = ssid.into_bytes();
                    self.burst(t, src, Some(&ssid));
                }
                Event::Associate(ssid) => {
                    let src = match self.script.scheme {
                        Scheme::WindowsLinuxAssociated => self.local_identity(),
                        _ => self.script.global_mac,
                    };
                    let ap = ap_for_ssid(&ssid);
                    let seq = self.next_seq();
                    self.emit(t, Some(src), frames::build_authentication(src, ap, seq));
                    let ies = self.probe_ies(src, Some(ssid.as_bytes()));
                    let seq = self.next_seq();
                    self.emit(
                        t + ASSOC_STEP_US,
                        Some(src),
                        frames::build_association(src, ap, seq, &ies),
                    );
                    let seq = self.next_seq();
                    self.emit(
                        t + 2 * ASSOC_STEP_US,
                        Some(src),
                        frames::build_data(src, ap, seq),
                    );
                }
                Event::HotspotBeacon => {
                    if let Some(bt) = self.script.bluetooth_mac {
                        // beacon source: the WiFi MAC with the local bit set
                        let mut b = *self.script.global_mac.as_bytes();
                        b[0] |= 0x02;
                        let src = MacAddress(b);
                        let mut ies = vec![InformationElement::new(0, b"iPhone".to_vec())];
                        ies.push(frames::apple_type6_ie(bt));
                        let seq = self.next_seq();
                        self.emit(t, Some(src), frames::build_beacon(src, seq, &ies));
                    }
                }
            }
        }
    }
}

/// Deterministic AP address for a simulated network name.
fn ap_for_ssid(ssid: &str) -> MacAddress {
    let mut h: u32 = 0x811C_9DC5;
    for b in ssid.bytes() {
        h = (h ^ b as u32).wrapping_mul(0x0100_0193);
    }
    let x = h.to_be_bytes();
    MacAddress([0x00, 0x40, 0x96, x[1], x[2], x[3]])
}

pub fn synthesize(scripts: &[TraceScript]) -> Result<Synthesis, SimError> {
    synthesize_with(scripts, 0.0, 0)
}

/// `drop_probability` simulates a lossy medium (seeded independently of the
/// per-device traffic generators, so dropping frames never reshuffles the
/// surviving ones).
pub fn synthesize_with(
    scripts: &[TraceScript],
    drop_probability: f64,
    medium_seed: u64,
) -> Result<Synthesis, SimError> {
    let mut seen: std::collections::BTreeMap<MacAddress, &str> = Default::default();
    for s in scripts {
        if let Some(prev) = seen.insert(s.global_mac, &s.device_id) {
            return Err(SimError::ScriptConflict(
                prev.to_string(),
                s.device_id.clone(),
                s.global_mac,
            ));
        }
    }

    let mut frames: Vec<(usize, u64, Vec<u8>)> = Vec::new();
    let mut truth = Vec::with_capacity(scripts.len());
    for (idx, script) in scripts.iter().enumerate() {
        let mut sim = DeviceSim::new(script);
        sim.run();
        for (t, bytes) in sim.out {
            frames.push((idx, t, bytes));
        }
        truth.push(GroundTruth {
            device_id: script.device_id.clone(),
            scheme: script.scheme,
            global_mac: script.global_mac,
            addresses: sim.addresses.into_iter().collect(),
            events: script
                .events
                .iter()
                .map(|(t, e)| format!("{t} {e:?}"))
                .collect(),
        });
    }
    // stable interleave: timestamp, then script order
    frames.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut medium = ChaCha8Rng::seed_from_u64(medium_seed);
    let frames = frames
        .into_iter()
        .filter(|_| drop_probability == 0.0 || medium.gen::<f64>() >= drop_probability)
        .map(|(_, t, bytes)| (t, bytes))
        .collect();

    Ok(Synthesis { frames, truth })
}

/// One freshly rotated source address under the given scheme.
pub fn random_mac<R: Rng>(scheme: Scheme, global: MacAddress, rng: &mut R) -> MacAddress {
    let mut b = [0u8; 6];
    rng.fill(&mut b);
    match scheme {
        Scheme::AndroidCid => {
            b[0] = 0xDA;
            b[1] = 0xA1;
            b[2] = 0x19;
        }
        Scheme::MotorolaCid => {
            b[0] = 0x92;
            b[1] = 0x68;
            b[2] = 0xC3;
        }
        Scheme::MotorolaGlobalRandom => {
            let p = global.prefix();
            b[0] = p[0];
            b[1] = p[1];
            b[2] = p[2];
        }
        _ => {
            // uniform over the 46 free bits, local set, multicast clear
            b[0] = (b[0] & !0x01) | 0x02;
        }
    }
    MacAddress(b)
}

/// `n` consecutive rotations of one simulated device, for randomness-quality
/// analysis without synthesizing frames.
pub fn random_address_stream(scheme: Scheme, n: usize, seed: u64) -> Vec<MacAddress> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let global = MacAddress([0xF0, 0xDB, 0xF8, 0, 0, 1]);
    (0..n).map(|_| random_mac(scheme, global, &mut rng)).collect()
}

/// IE layout of a randomized iOS probe: constant across rotations and
/// carrying the Apple vendor element.
pub fn ios_sig() -> Vec<InformationElement> {
    vec![
        InformationElement::new(0, vec![]),
        InformationElement::new(1, vec![0x82, 0x84, 0x8B, 0x96]),
        InformationElement::new(50, vec![0x0C, 0x12, 0x18, 0x24]),
        InformationElement::new(45, vec![0x2C, 0x01, 0x03, 0xFF, 0x00, 0x00, 0x00]),
        InformationElement::new(221, vec![0x00, 0x17, 0xF2, 0x0A, 0x00, 0x00]),
    ]
}

fn demo_wps(manufacturer: &str, model: &str, global: MacAddress) -> WpsAttributes {
    WpsAttributes {
        manufacturer: Some(manufacturer.into()),
        model_name: Some(model.into()),
        model_number: None,
        uuid_e: Some(crate::derandomize::uuid_e_from_mac(global)),
        tlv_overrun: false,
    }
}

/// OUIs whose global addresses appear in [`demo_corpus`] WPS devices; a
/// rainbow table over these reverses every demo UUID-E.
pub const DEMO_WPS_OUIS: [[u8; 3]; 2] = [[0x00, 0x0A, 0x28], [0x90, 0x68, 0xC3]];

/// A 60-device corpus, 10 devices per scheme, with per-device event windows
/// spaced far enough apart that sequence chains never collide across
/// devices. Global addresses sit in the low 16-bit suffix space so a
/// desk-scale rainbow table covers the WPS devices.
pub fn demo_corpus(seed: u64) -> Vec<TraceScript> {
    let schemes = [
        Scheme::AndroidCid,
        Scheme::MotorolaCid,
        Scheme::MotorolaGlobalRandom,
        Scheme::NoRandomization,
        Scheme::IosFullRandom,
        Scheme::WindowsLinuxAssociated,
    ];
    let mut scripts = Vec::with_capacity(60);
    for (si, &scheme) in schemes.iter().enumerate() {
        for i in 0..10u8 {
            let d = si * 10 + i as usize;
            let t0 = d as u64 * 20_000_000;
            let global = match scheme {
                Scheme::AndroidCid => MacAddress([0x00, 0x0A, 0x28, 0x00, 0x01, i]),
                Scheme::MotorolaCid => MacAddress([0x90, 0x68, 0xC3, 0x00, 0x02, i]),
                Scheme::MotorolaGlobalRandom => MacAddress([0x40, 0x78, 0x6A, 0x00, 0x03, i]),
                Scheme::NoRandomization => MacAddress([0xB4, 0x52, 0x7E, 0x00, 0x04, i]),
                Scheme::IosFullRandom => MacAddress([0xF0, 0xDB, 0xF8, 0x00, 0x05, i]),
                Scheme::WindowsLinuxAssociated => MacAddress([0x00, 0x1B, 0x77, 0x00, 0x06, i]),
            };
            let mut s = TraceScript::new(&format!("dev-{d:02}"), scheme, global, seed ^ (d as u64 + 1));
            match scheme {
                Scheme::AndroidCid => {
                    s.wps = Some(demo_wps("Google", "DemoPhone", global));
                    s = s
                        .at(t0, Event::ProbeBurst)
                        .at(t0 + 1_000_000, Event::ScreenOn)
                        .at(t0 + 2_000_000, Event::ProbeBurst);
                }
                Scheme::MotorolaCid => {
                    s.wps = Some(demo_wps("Motorola", "DemoMoto", global));
                    s = s
                        .at(t0, Event::ProbeBurst)
                        .at(t0 + 1_000_000, Event::ScreenOn)
                        .at(t0 + 2_000_000, Event::ProbeBurst);
                }
                Scheme::MotorolaGlobalRandom => {
                    s.rand_lifetime_s = 1;
                    s.sig_global = default_sig_random();
                    s = s
                        .at(t0, Event::ProbeBurst)
                        .at(t0 + 1_100_000, Event::ProbeBurst)
                        .at(t0 + 2_200_000, Event::ProbeBurst)
                        .at(t0 + 3_300_000, Event::ProbeBurst)
                        .at(t0 + 4_000_000, Event::Associate(format!("Net-{d}")));
                }
                Scheme::NoRandomization => {
                    s = s.at(t0, Event::ProbeBurst).at(t0 + 1_000_000, Event::ProbeBurst);
                }
                Scheme::IosFullRandom => {
                    s.sig_global = ios_sig();
                    s.sig_random = ios_sig();
                    s = s
                        .at(t0, Event::ProbeBurst)
                        .at(t0 + 1_000_000, Event::ProbeBurst)
                        .at(t0 + 1_800_000, Event::Associate(format!("Home-{d}")));
                }
                Scheme::WindowsLinuxAssociated => {
                    s = s
                        .at(t0, Event::ProbeBurst)
                        .at(t0 + 1_000_000, Event::Associate(format!("Office-{d}")));
                }
            }
            scripts.push(s);
        }
    }
    scripts
}

/// `n` Apple hotspot devices, `one_off_per_mille` of which use the ±1
/// Bluetooth addressing scheme; the rest share the OUI with another offset.
pub fn hotspot_scripts(n: usize, one_off_per_mille: u32, seed: u64) -> Vec<TraceScript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let global = MacAddress([0xF0, 0xDB, 0xF8, 0x40, (i >> 8) as u8, i as u8]);
            let mut b = *global.as_bytes();
            if rng.gen_range(0..1000) < one_off_per_mille {
                b[5] = b[5].wrapping_add(if rng.gen() { 1 } else { 0xFF });
            } else {
                b[5] = b[5].wrapping_add(7);
            }
            let mut s =
                TraceScript::new(&format!("hs-{i}"), Scheme::IosFullRandom, global, seed + i as u64);
            s.bluetooth_mac = Some(MacAddress(b));
            s.at(i as u64 * 200_000, Event::HotspotBeacon)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// RTS/CTS responder

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dot11State {
    S1Unauth,
    S2Auth,
    S3Assoc,
}

#[derive(Debug, Clone)]
pub struct ResponderState {
    pub global_mac: MacAddress,
    pub state: Dot11State,
    pub wifi_enabled: bool,
    pub airplane_mode: bool,
    pub location_wake: bool,
}

impl ResponderState {
    pub fn new(global_mac: MacAddress) -> Self {
        Self {
            global_mac,
            state: Dot11State::S1Unauth,
            wifi_enabled: true,
            airplane_mode: false,
            location_wake: false,
        }
    }

    /// Location-service wakeups keep the radio listening even with WiFi off
    /// or in airplane mode.
    fn radio_awake(&self) -> bool {
        self.wifi_enabled || self.location_wake
    }
}

/// Class-1 frame handling: RTS addressed to the device's global MAC elicits
/// a CTS back to whatever source the RTS claimed; every other frame is
/// ignored at state 1. Authentication/association frames drive the state
/// machine but are not answered here (the synthesizer models honest APs).
pub fn respond(state: &mut ResponderState, frame: &ManagementFrame) -> Option<ManagementFrame> {
    let to_me = frame.destination == state.global_mac;
    match frame.kind {
        FrameKind::Rts if to_me && state.radio_awake() => {
            let src = frame.source?;
            let cts = frames::build_cts(src, frame.duration);
            Some(crate::capture::parse_frame_at(&cts, frame.timestamp).expect("CTS parses"))
        }
        FrameKind::Authentication if to_me => {
            if state.state == Dot11State::S1Unauth {
                state.state = Dot11State::S2Auth;
            }
            None
        }
        FrameKind::Association if to_me => {
            if state.state == Dot11State::S2Auth {
                state.state = Dot11State::S3Assoc;
            }
            None
        }
        FrameKind::Deauthentication if to_me => {
            state.state = Dot11State::S1Unauth;
            None
        }
        _ => None,
    }
}

/// One RTS per candidate, each from a fresh crafted source; a candidate is
/// present when some responder answers with a CTS addressed to that source.
pub fn rts_scan(
    candidates: &[MacAddress],
    responders: &mut [ResponderState],
) -> Vec<(MacAddress, bool)> {
    let mut results = Vec::with_capacity(candidates.len());
    for (i, &cand) in candidates.iter().enumerate() {
        // crafted source: locally assigned, never colliding with a real device
        let crafted = MacAddress([0x02, 0x00, 0x5E, 0x00, (i >> 8) as u8, i as u8]);
        let rts = frames::build_rts(crafted, cand, 44);
        let frame = crate::capture::parse_frame(&rts).expect("RTS parses");
        let present = responders.iter_mut().any(|r| {
            respond(r, &frame)
                .map(|cts| cts.kind == FrameKind::Cts && cts.destination == crafted)
                .unwrap_or(false)
        });
        results.push((cand, present));
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::address::{classify_bits, AddressClass};
    use crate::capture::parse_all;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    fn parse_synthesis(s: &Synthesis) -> Vec<ManagementFrame> {
        s.frames
            .iter()
            .map(|(t, b)| crate::capture::parse_frame_at(b, *t).unwrap())
            .collect()
    }

    #[test]
    fn android_screen_on_leaks_global() {
        let script = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:01"), 5)
            .at(0, Event::ProbeBurst)
            .at(1_000_000, Event::ScreenOn);
        let s = synthesize(&[script]).unwrap();
        let frames = parse_synthesis(&s);
        assert!(frames
            .iter()
            .any(|f| f.source.unwrap().prefix() == [0xDA, 0xA1, 0x19]));
        assert!(frames
            .iter()
            .any(|f| f.source == Some(mac("40:78:6A:00:00:01"))));
        // one global sequence counter across the whole trace
        let seqs: Vec<u16> = frames.iter().map(|f| f.sequence_number).collect();
        for w in seqs.windows(2) {
            assert_eq!((w[1] + 4096 - w[0]) % 4096, 1);
        }
    }

    #[test]
    fn ios_never_emits_global() {
        let mut script = TraceScript::new("d1", Scheme::IosFullRandom, mac("F0:DB:F8:00:00:01"), 9);
        for i in 0..50 {
            script = script
                .at(i * 120_000_000, Event::ProbeBurst)
                .at(i * 120_000_000 + 500_000, Event::ScreenOn);
        }
        let s = synthesize(&[script]).unwrap();
        for f in parse_synthesis(&s) {
            let src = f.source.unwrap();
            assert_ne!(src, mac("F0:DB:F8:00:00:01"));
            assert_eq!(classify_bits(src), AddressClass::LocalUnicast);
        }
    }

    #[test]
    fn rotation_respects_lifetime() {
        let mut script = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:02"), 1);
        for i in 0..10 {
            script = script.at(i * 15_000_000, Event::ProbeBurst);
        }
        let s = synthesize(&[script]).unwrap();
        let frames = parse_synthesis(&s);
        let distinct: BTreeSet<_> = frames.iter().map(|f| f.source.unwrap()).collect();
        // 150 s of bursts at a 60 s lifetime: 3 distinct randomized addresses
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn deterministic_output() {
        let script = || {
            TraceScript::new("d1", Scheme::MotorolaCid, mac("40:78:6A:00:00:03"), 77)
                .at(0, Event::ProbeBurst)
                .at(2_000_000, Event::Associate("HomeNet".into()))
                .at(4_000_000, Event::IncomingCall)
        };
        let a = synthesize(&[script()]).unwrap();
        let b = synthesize(&[script()]).unwrap();
        assert_eq!(a.frames, b.frames);
    }

    #[test]
    fn empty_event_list_empty_pcap() {
        let script = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:04"), 0);
        let s = synthesize(&[script]).unwrap();
        assert!(s.frames.is_empty());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.pcap");
        s.write_pcap(&path).unwrap();
        let cap = crate::pcap::parse_capture(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(cap.frames.len(), 0);
    }

    #[test]
    fn duplicate_global_mac_rejected() {
        let a = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:05"), 0);
        let b = TraceScript::new("d2", Scheme::IosFullRandom, mac("40:78:6A:00:00:05"), 1);
        assert!(matches!(
            synthesize(&[a, b]),
            Err(SimError::ScriptConflict(..))
        ));
    }

    #[test]
    fn pcap_round_trip_preserves_frames() {
        let script = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:06"), 3)
            .at(0, Event::ProbeBurst)
            .at(1_000_000, Event::Associate("CoffeeShop".into()))
            .at(2_000_000, Event::DirectedProbe("HomeNet".into()));
        let s = synthesize(&[script]).unwrap();
        let direct = parse_synthesis(&s);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.pcap");
        s.write_pcap(&path).unwrap();
        let cap = crate::pcap::parse_capture(&std::fs::read(&path).unwrap()).unwrap();
        let (reread, malformed) = parse_all(&cap);
        assert_eq!(malformed, 0);
        assert_eq!(direct, reread);
        // timestamps non-decreasing
        assert!(reread.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
    }

    #[test]
    fn ios_rotations_pass_randomness_suite() {
        let mut script = TraceScript::new("d1", Scheme::IosFullRandom, mac("F0:DB:F8:00:00:02"), 4);
        script.rand_lifetime_s = 1;
        for i in 0..600 {
            script = script.at(i * 2_000_000, Event::ProbeBurst);
        }
        let s = synthesize(&[script]).unwrap();
        let addrs: BTreeSet<_> = parse_synthesis(&s)
            .iter()
            .map(|f| f.source.unwrap())
            .collect();
        let addrs: Vec<_> = addrs.into_iter().collect();
        assert!(addrs.len() >= 500);
        let bits = crate::randtest::mac_bitstream(&addrs);
        assert!(crate::randtest::fips_suite(&bits).unwrap().pass());
    }

    #[test]
    fn hotspot_beacon_carries_type6() {
        let mut script = TraceScript::new("d1", Scheme::IosFullRandom, mac("F0:DB:F8:12:34:56"), 6)
            .at(0, Event::HotspotBeacon);
        script.bluetooth_mac = Some(mac("F0:DB:F8:12:34:57"));
        let s = synthesize(&[script]).unwrap();
        let frames = parse_synthesis(&s);
        assert_eq!(frames.len(), 1);
        let f = &frames[0];
        assert_eq!(f.kind, FrameKind::Beacon);
        assert_eq!(f.source, Some(mac("F2:DB:F8:12:34:56")));
        let ie = f
            .find_vendor(crate::capture::APPLE_OUI, crate::capture::APPLE_TYPE6)
            .unwrap();
        assert_eq!(&ie.value[4..10], mac("F0:DB:F8:12:34:57").as_bytes());
    }

    #[test]
    fn windows_linux_associates_from_local_mac() {
        let script =
            TraceScript::new("d1", Scheme::WindowsLinuxAssociated, mac("00:05:5D:00:00:09"), 8)
                .at(0, Event::ProbeBurst)
                .at(1_000_000, Event::Associate("Office".into()));
        let s = synthesize(&[script]).unwrap();
        let frames = parse_synthesis(&s);
        let probe_src = frames[0].source.unwrap();
        assert!(probe_src.is_local());
        let auth = frames
            .iter()
            .find(|f| f.kind == FrameKind::Authentication)
            .unwrap();
        assert_eq!(auth.source, Some(probe_src));
        assert!(frames.iter().any(|f| f.kind == FrameKind::Data));
    }

    #[test]
    fn responder_answers_only_rts_to_global() {
        let target = mac("F0:DB:F8:AA:BB:CC");
        let mut r = ResponderState::new(target);
        let crafted = mac("02:00:5E:00:00:01");

        let rts = crate::capture::parse_frame(&frames::build_rts(crafted, target, 314)).unwrap();
        let cts = respond(&mut r, &rts).unwrap();
        assert_eq!(cts.kind, FrameKind::Cts);
        assert_eq!(cts.destination, crafted);
        assert_eq!(cts.duration, 314);
        assert_eq!(cts.source, None);

        // probe request to the global MAC: silence
        let mut probe =
            crate::capture::parse_frame(&frames::build_probe_request(crafted, 1, &[])).unwrap();
        probe.destination = target;
        assert!(respond(&mut r, &probe).is_none());

        // RTS to a randomized alias: silence
        let alias = mac("F2:DB:F8:AA:BB:CC");
        let rts2 = crate::capture::parse_frame(&frames::build_rts(crafted, alias, 44)).unwrap();
        assert!(respond(&mut r, &rts2).is_none());
    }

    #[test]
    fn wifi_off_location_wake_still_answers() {
        let target = mac("F0:DB:F8:AA:BB:CD");
        let mut r = ResponderState::new(target);
        r.wifi_enabled = false;
        r.airplane_mode = true;
        r.location_wake = true;
        let got = rts_scan(&[target], &mut [r.clone()]);
        assert_eq!(got, vec![(target, true)]);

        r.location_wake = false;
        let got = rts_scan(&[target], &mut [r]);
        assert_eq!(got, vec![(target, false)]);
    }

    #[test]
    fn state_machine_transitions() {
        let target = mac("F0:DB:F8:AA:BB:CE");
        let ap = mac("00:40:96:00:00:01");
        let mut r = ResponderState::new(target);
        // frames *to* the station drive its state in this simulation
        let auth = crate::capture::parse_frame(&frames::build_authentication(ap, target, 1)).unwrap();
        respond(&mut r, &auth);
        assert_eq!(r.state, Dot11State::S2Auth);
        let assoc =
            crate::capture::parse_frame(&frames::build_association(ap, target, 2, &[])).unwrap();
        respond(&mut r, &assoc);
        assert_eq!(r.state, Dot11State::S3Assoc);
        // RTS still answered in S3
        let rts = crate::capture::parse_frame(&frames::build_rts(ap, target, 1)).unwrap();
        assert!(respond(&mut r, &rts).is_some());
    }

    #[test]
    fn scan_matrix_no_false_positives() {
        let mut responders: Vec<ResponderState> = (0..16)
            .map(|i| {
                let mut r = ResponderState::new(MacAddress([0xF0, 0xDB, 0xF8, 0, 1, i as u8]));
                if i % 4 == 3 {
                    r.wifi_enabled = false;
                    r.location_wake = true;
                }
                r
            })
            .collect();
        let mut candidates: Vec<MacAddress> =
            responders.iter().map(|r| r.global_mac).collect();
        candidates.extend((0..16).map(|i| MacAddress([0xF0, 0xDB, 0xF8, 9, 9, i as u8])));
        let results = rts_scan(&candidates, &mut responders);
        for (i, (_, present)) in results.iter().enumerate() {
            assert_eq!(*present, i < 16, "candidate {i}");
        }
    }

    #[test]
    fn drop_knob_thins_trace() {
        let script = |n: u64| {
            let mut s = TraceScript::new("d1", Scheme::AndroidCid, mac("40:78:6A:00:00:0A"), 2);
            for i in 0..n {
                s = s.at(i * 15_000_000, Event::ProbeBurst);
            }
            s
        };
        let full = synthesize(&[script(40)]).unwrap();
        let thinned = synthesize_with(&[script(40)], 0.5, 1).unwrap();
        assert!(thinned.frames.len() < full.frames.len());
        assert!(!thinned.frames.is_empty());
        // surviving frames are a subsequence of the lossless trace
        let mut it = full.frames.iter();
        for f in &thinned.frames {
            assert!(it.any(|g| g == f));
        }
    }
}

//! Command-line surface: ingest pcaps into a catalog, run derandomization,
//! render reports, and drive the simulator, RTS scanner, randomness tests,
//! and rainbow-table builder.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use macrand::address::{classify_bits, AddressClass, MacAddress, PrefixRegistry};
use macrand::capture::{parse_all, ManagementFrame};
use macrand::catalog::{sha256_hex, CatalogStore, Manifest};
use macrand::classify::{
    build_bin_report, classify_capture, Bin, ClassifyConfig, DeviceKey, DeviceRecord,
};
use macrand::derandomize::{
    audit_karma, build_rainbow_table, chain_sequences_with, correlate_type6, derand_pipeline,
    ChainConfig, KarmaConfig, LinkMethod, OffsetClass, RainbowTable,
};
use macrand::error::CaptureError;
use macrand::randtest;
use macrand::signature::DeviceSignature;
use macrand::simulate::{
    demo_corpus, hotspot_scripts, rts_scan, synthesize_with, ResponderState, TraceScript,
};

#[derive(Parser)]
#[command(
    name = "macrand",
    version,
    about = "802.11 MAC address randomization analysis toolkit"
)]
struct Cli {
    /// Catalog directory (created on ingest).
    #[arg(long, global = true, default_value = "catalog")]
    catalog: PathBuf,
    /// Prefix registry CSV; defaults to the built-in registry.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    /// Canonical signature display filter applied at ingest
    /// (e.g. "0,1,50,3,45,221(0x50f2,8),htcap:012c,htagg:03,htmcs:000000ff").
    #[arg(long, global = true)]
    signature: Option<String>,
    /// Seed for anything stochastic (simulation only; analysis is
    /// deterministic regardless).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit machine-readable JSON instead of text tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse pcaps, derive signatures, classify devices, persist the catalog.
    Ingest {
        /// Input pcap files (LINKTYPE 105 or radiotap).
        pcaps: Vec<PathBuf>,
        /// Distinct-address floor for OUI-randomization detection.
        #[arg(long, default_value_t = 10)]
        global_floor: usize,
        /// Fraction of capture distinct addresses for the same detector.
        #[arg(long, default_value_t = 0.20)]
        global_fraction: f64,
        /// Vendor type byte of the constant Apple probe IE.
        #[arg(long, default_value_t = 10)]
        apple_vendor_type: u8,
    },
    /// Sequence chaining, auth/assoc linking, UUID-E reversal, Type-6
    /// correlation over an ingested catalog.
    Derand {
        /// Maximum forward sequence gap (mod 4096) for a chain join.
        #[arg(long, default_value_t = 30)]
        max_gap: u16,
        /// Maximum time gap in microseconds for a chain join.
        #[arg(long, default_value_t = 2_000_000)]
        max_dt_us: u64,
        /// Rainbow table for UUID-E reversal; omitted = reversal skipped.
        #[arg(long)]
        rainbow: Option<PathBuf>,
        /// Write a (max_gap, max_dt_us, links) threshold-sweep CSV here.
        #[arg(long)]
        sweep: Option<PathBuf>,
    },
    /// Render bin tables, Karma top-N SSIDs, Type-6 offset classes, and the
    /// randomness report for the catalog.
    Report,
    /// Synthesize a ground-truth pcap from trace scripts.
    Simulate {
        /// JSON file holding an array of trace scripts.
        #[arg(long, conflicts_with_all = ["demo", "hotspots"])]
        scripts: Option<PathBuf>,
        /// Emit the built-in 60-device corpus (10 devices per scheme).
        #[arg(long)]
        demo: bool,
        /// Emit N Apple hotspot beacon devices instead.
        #[arg(long)]
        hotspots: Option<usize>,
        /// Per-mille of hotspot devices using the one-off Bluetooth scheme.
        #[arg(long, default_value_t = 954)]
        one_off_per_mille: u32,
        /// Output pcap path.
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON-lines path (defaults to OUT with .truth.jsonl).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Probability of dropping each frame (lossy-medium stress knob).
        #[arg(long, default_value_t = 0.0)]
        drop_prob: f64,
    },
    /// RTS/CTS presence scan against simulated responders.
    Rts {
        /// Responder global MACs (comma separated). Present devices.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<MacAddress>,
        /// Candidate MACs to scan (defaults to the targets).
        #[arg(long, value_delimiter = ',')]
        candidates: Vec<MacAddress>,
        /// Simulate WiFi radios off; with --location-wake they still answer.
        #[arg(long)]
        wifi_off: bool,
        /// Location-service wakeups keep the radio answering class-1 frames.
        #[arg(long)]
        location_wake: bool,
    },
    /// Collision statistics and the FIPS 140-1 suite over randomized
    /// addresses from a pcap or the catalog.
    Randtest {
        /// Pcap to draw locally assigned source addresses from; defaults to
        /// the catalog's randomized records.
        #[arg(long)]
        pcap: Option<PathBuf>,
        /// Prefix space size m (2^22 = 24 prefix bits minus the two fixed).
        #[arg(long, default_value_t = 1 << 22)]
        space: u64,
        /// Bit offset into the stream before the 20,000-bit FIPS window.
        #[arg(long, default_value_t = 0)]
        offset: usize,
    },
    /// Build or query a UUID-E rainbow table.
    Rainbow {
        /// OUIs to enumerate, e.g. --oui 90:68:C3 --oui 00:0A:28.
        #[arg(long = "oui")]
        ouis: Vec<String>,
        /// Table path (built if OUIs are given, opened for --lookup).
        #[arg(long)]
        table: PathBuf,
        /// Per-OUI suffix bits: 24 = full table, 16 = desk-scale.
        #[arg(long, default_value_t = 24)]
        suffix_bits: u32,
        /// Reverse one UUID-E (32 hex chars) through the table.
        #[arg(long)]
        lookup: Option<String>,
    },
}

/// Error carrying the process exit code: 1 usage, 2 input format, 3
/// internal invariant violation.
struct AppError {
    code: u8,
    message: String,
}

impl AppError {
    fn usage(msg: impl Into<String>) -> Self {
        Self { code: 1, message: msg.into() }
    }
    fn input(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }
    fn internal(msg: impl Into<String>) -> Self {
        Self { code: 3, message: msg.into() }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_registry(path: &Option<PathBuf>) -> Result<PrefixRegistry, AppError> {
    match path {
        None => Ok(PrefixRegistry::builtin()),
        Some(p) => PrefixRegistry::load(p).map_err(|e| AppError::input(format!("{}: {e}", p.display()))),
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Cmd::Ingest {
            ref pcaps,
            global_floor,
            global_fraction,
            apple_vendor_type,
        } => cmd_ingest(&cli, pcaps, global_floor, global_fraction, apple_vendor_type),
        Cmd::Derand {
            max_gap,
            max_dt_us,
            ref rainbow,
            ref sweep,
        } => cmd_derand(&cli, max_gap, max_dt_us, rainbow, sweep),
        Cmd::Report => cmd_report(&cli),
        Cmd::Simulate {
            ref scripts,
            demo,
            hotspots,
            one_off_per_mille,
            ref out,
            ref truth,
            drop_prob,
        } => cmd_simulate(&cli, scripts, demo, hotspots, one_off_per_mille, out, truth, drop_prob),
        Cmd::Rts {
            ref targets,
            ref candidates,
            wifi_off,
            location_wake,
        } => cmd_rts(&cli, targets, candidates, wifi_off, location_wake),
        Cmd::Randtest { ref pcap, space, offset } => cmd_randtest(&cli, pcap, space, offset),
        Cmd::Rainbow {
            ref ouis,
            ref table,
            suffix_bits,
            ref lookup,
        } => cmd_rainbow(&cli, ouis, table, suffix_bits, lookup),
    }
}

fn classify_config(global_floor: usize, global_fraction: f64, apple_vendor_type: u8) -> ClassifyConfig {
    ClassifyConfig {
        global_floor,
        global_fraction,
        apple_probe_vendor_type: apple_vendor_type,
        ..ClassifyConfig::default()
    }
}

fn cmd_ingest(
    cli: &Cli,
    pcaps: &[PathBuf],
    global_floor: usize,
    global_fraction: f64,
    apple_vendor_type: u8,
) -> Result<(), AppError> {
    if pcaps.is_empty() {
        return Err(AppError::usage("ingest requires at least one pcap path"));
    }
    let registry = load_registry(&cli.registry)?;
    let store = CatalogStore::open_writable(&cli.catalog)
        .map_err(|e| AppError::internal(e.to_string()))?;

    let mut frames: Vec<ManagementFrame> = Vec::new();
    let mut inputs = BTreeMap::new();
    let mut failures = Vec::new();
    for path in pcaps {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        match macrand::pcap::parse_capture(&bytes) {
            Ok(cap) => {
                let (parsed, malformed) = parse_all(&cap);
                if !cli.json {
                    println!(
                        "{}: {} frames, {} malformed",
                        path.display(),
                        parsed.len(),
                        malformed
                    );
                }
                frames.extend(parsed);
            }
            Err(e @ CaptureError::UnsupportedLinkType(_)) => {
                failures.push(format!("{}: {e}", path.display()));
            }
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    frames.sort_by_key(|f| f.timestamp);

    if let Some(filter) = &cli.signature {
        frames.retain(|f| {
            !f.kind.is_management() || DeviceSignature::from_ies(&f.ies).canonical == *filter
        });
    }

    let cfg = classify_config(global_floor, global_fraction, apple_vendor_type);
    let records = classify_capture(&frames, &registry, &cfg);

    store.save_frames(&frames)?;
    store.save_records(&records)?;
    let mut thresholds = BTreeMap::new();
    thresholds.insert("global_floor".into(), global_floor.to_string());
    thresholds.insert("global_fraction".into(), global_fraction.to_string());
    thresholds.insert("apple_vendor_type".into(), apple_vendor_type.to_string());
    if let Some(sig) = &cli.signature {
        thresholds.insert("signature_filter".into(), sig.clone());
    }
    store.save_manifest(&Manifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        thresholds,
        inputs,
    })?;

    let report = build_bin_report(&records);
    if cli.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    } else {
        print_bin_report(&report);
    }
    for f in &failures {
        eprintln!("error: {f}");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(AppError::input(format!("{} input file(s) failed", failures.len())))
    }
}

fn cmd_derand(
    cli: &Cli,
    max_gap: u16,
    max_dt_us: u64,
    rainbow: &Option<PathBuf>,
    sweep: &Option<PathBuf>,
) -> Result<(), AppError> {
    let registry = load_registry(&cli.registry)?;
    let store = CatalogStore::open_writable(&cli.catalog)
        .map_err(|e| AppError::internal(e.to_string()))?;
    let frames = store.load_frames()?;
    let mut records = store.load_records()?;
    if frames.is_empty() && records.is_empty() {
        return Err(AppError::usage(format!(
            "catalog {} is empty; run ingest first",
            cli.catalog.display()
        )));
    }

    let mut table = match rainbow {
        Some(p) => Some(RainbowTable::open(p).map_err(|e| AppError::input(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let chain_cfg = ChainConfig { max_gap, max_dt_us };
    let classify_cfg = catalog_classify_config(&store);
    let outcome = derand_pipeline(
        &frames,
        &mut records,
        table.as_mut(),
        &registry,
        &classify_cfg,
        &chain_cfg,
    )
    .map_err(|e| AppError::input(e.to_string()))?;

    store.save_records(&records)?;
    store.save_links(&outcome.links)?;
    if let Some(mut manifest) = store.load_manifest()? {
        manifest.thresholds.insert("max_gap".into(), max_gap.to_string());
        manifest.thresholds.insert("max_dt_us".into(), max_dt_us.to_string());
        manifest
            .thresholds
            .insert("rainbow".into(), rainbow.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "skipped".into()));
        store.save_manifest(&manifest)?;
    }

    if let Some(path) = sweep {
        write_sweep(path, &frames, &records, &registry, &classify_cfg)?;
        if !cli.json {
            println!("sweep written to {}", path.display());
        }
    }

    if cli.json {
        println!("{}", serde_json::to_string(&outcome).unwrap());
    } else {
        print_matrix(&outcome);
    }
    Ok(())
}

/// Reconstructs the classify thresholds recorded at ingest so derand's
/// scheme detection matches what produced the records.
fn catalog_classify_config(store: &CatalogStore) -> ClassifyConfig {
    let mut cfg = ClassifyConfig::default();
    if let Ok(Some(m)) = store.load_manifest() {
        if let Some(v) = m.thresholds.get("global_floor").and_then(|v| v.parse().ok()) {
            cfg.global_floor = v;
        }
        if let Some(v) = m.thresholds.get("global_fraction").and_then(|v| v.parse().ok()) {
            cfg.global_fraction = v;
        }
        if let Some(v) = m.thresholds.get("apple_vendor_type").and_then(|v| v.parse().ok()) {
            cfg.apple_probe_vendor_type = v;
        }
    }
    cfg
}

fn write_sweep(
    path: &Path,
    frames: &[ManagementFrame],
    records: &[DeviceRecord],
    registry: &PrefixRegistry,
    classify_cfg: &ClassifyConfig,
) -> Result<(), AppError> {
    use std::io::Write;
    let prefixes = macrand::classify::detect_global_scheme(frames, registry, classify_cfg);
    let pairs = macrand::signature::signature_pairs(records);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "max_gap,max_dt_us,links,ambiguities")?;
    for &gap in &[5u16, 10, 20, 30, 50] {
        for &dt in &[500_000u64, 1_000_000, 2_000_000, 5_000_000] {
            let cfg = ChainConfig { max_gap: gap, max_dt_us: dt };
            let (links, amb) = chain_sequences_with(frames, &pairs, &cfg, &prefixes);
            writeln!(out, "{gap},{dt},{},{}", links.len(), amb.len())?;
        }
    }
    Ok(())
}

fn cmd_report(cli: &Cli) -> Result<(), AppError> {
    let store = CatalogStore::open(&cli.catalog).map_err(|e| AppError::input(e.to_string()))?;
    let records = store.load_records()?;
    let frames = store.load_frames()?;
    let merged = macrand::derandomize::merge_linked(records.clone());
    let bin_report = build_bin_report(&merged);

    // Karma audit over device-keyed frame groups.
    let mut key_of: BTreeMap<MacAddress, DeviceKey> = BTreeMap::new();
    for rec in &records {
        for a in &rec.addresses {
            key_of.insert(*a, rec.key.clone());
        }
    }
    let mut groups: BTreeMap<DeviceKey, Vec<&ManagementFrame>> = BTreeMap::new();
    for f in &frames {
        if let Some(src) = f.source {
            if let Some(key) = key_of.get(&src) {
                groups.entry(key.clone()).or_default().push(f);
            }
        }
    }
    let (karma_findings, karma_top) = audit_karma(&groups, &KarmaConfig::default());

    // Type-6 offset classes over beacons.
    let type6 = correlate_type6(&frames).map_err(|e| AppError::input(e.to_string()))?;
    let mut offsets: BTreeMap<&'static str, usize> = BTreeMap::new();
    for f in &type6 {
        let name = match f.offset {
            OffsetClass::OneHigher => "one_higher",
            OffsetClass::OneLower => "one_lower",
            OffsetClass::Same => "same",
            OffsetClass::SameOuiOther => "same_oui_other",
        };
        *offsets.entry(name).or_default() += 1;
    }

    // Randomness over fully randomized addresses; CID-prefixed bins share a
    // fixed prefix and would trivially collide.
    let randomized: Vec<MacAddress> = records
        .iter()
        .filter(|r| matches!(r.bin, Bin::RandIos | Bin::UnknownLocal))
        .flat_map(|r| r.addresses.iter().copied())
        .filter(|a| classify_bits(*a) == AddressClass::LocalUnicast)
        .collect();
    let randomness = if randomized.is_empty() {
        None
    } else {
        Some(randtest::randomness_report(&randomized, 1 << 22))
    };

    if cli.json {
        let doc = serde_json::json!({
            "bins": bin_report,
            "karma": { "findings": karma_findings.len(), "top_ssids": karma_top },
            "type6": { "beacons": type6.len(), "offsets": offsets },
            "randomness": randomness,
        });
        println!("{doc}");
        return Ok(());
    }

    print_bin_report(&bin_report);
    println!();
    println!("karma: {} device(s) sent directed probes", karma_findings.len());
    let offload = karma_findings.iter().filter(|f| f.offload_flag).count();
    println!("karma: {offload} device(s) probed known offload SSIDs");
    for (ssid, n) in &karma_top {
        println!("  {n:>6}  {ssid}");
    }
    println!();
    if type6.is_empty() {
        println!("type6: no Apple hotspot beacons");
    } else {
        println!("type6: {} hotspot beacon device(s)", type6.len());
        let one_off = offsets.get("one_higher").unwrap_or(&0) + offsets.get("one_lower").unwrap_or(&0);
        for (name, n) in &offsets {
            println!("  {name:<15} {n:>6}  ({:.1}%)", 100.0 * *n as f64 / type6.len() as f64);
        }
        println!("  one-off scheme: {:.1}%", 100.0 * one_off as f64 / type6.len() as f64);
    }
    println!();
    match randomness {
        None => println!("randomness: no randomized addresses"),
        Some(r) => print_randomness(&r),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    scripts: &Option<PathBuf>,
    demo: bool,
    hotspots: Option<usize>,
    one_off_per_mille: u32,
    out: &Path,
    truth: &Option<PathBuf>,
    drop_prob: f64,
) -> Result<(), AppError> {
    let scripts: Vec<TraceScript> = if let Some(path) = scripts {
        serde_json::from_slice(&std::fs::read(path)?)
            .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?
    } else if let Some(n) = hotspots {
        hotspot_scripts(n, one_off_per_mille, cli.seed)
    } else if demo {
        demo_corpus(cli.seed)
    } else {
        return Err(AppError::usage("simulate needs --scripts, --demo, or --hotspots"));
    };

    let synthesis = synthesize_with(&scripts, drop_prob, cli.seed)
        .map_err(|e| AppError::input(e.to_string()))?;
    synthesis.write_pcap(out)?;
    let truth_path = truth
        .clone()
        .unwrap_or_else(|| out.with_extension("truth.jsonl"));
    synthesis.write_truth(&truth_path)?;
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "devices": scripts.len(),
                "frames": synthesis.frames.len(),
                "pcap": out.display().to_string(),
                "truth": truth_path.display().to_string(),
            })
        );
    } else {
        println!(
            "{} device(s), {} frame(s) -> {} (truth: {})",
            scripts.len(),
            synthesis.frames.len(),
            out.display(),
            truth_path.display()
        );
    }
    Ok(())
}

fn cmd_rts(
    cli: &Cli,
    targets: &[MacAddress],
    candidates: &[MacAddress],
    wifi_off: bool,
    location_wake: bool,
) -> Result<(), AppError> {
    let mut responders: Vec<ResponderState> = targets
        .iter()
        .map(|&t| {
            let mut r = ResponderState::new(t);
            r.wifi_enabled = !wifi_off;
            r.location_wake = location_wake;
            r
        })
        .collect();
    let candidates: Vec<MacAddress> = if candidates.is_empty() {
        targets.to_vec()
    } else {
        candidates.to_vec()
    };
    let results = rts_scan(&candidates, &mut responders);
    if cli.json {
        let doc: Vec<_> = results
            .iter()
            .map(|(m, p)| serde_json::json!({ "mac": m.to_string(), "present": p }))
            .collect();
        println!("{}", serde_json::json!(doc));
    } else {
        for (mac, present) in &results {
            println!("{mac}  {}", if *present { "present" } else { "absent" });
        }
    }
    Ok(())
}

fn cmd_randtest(
    cli: &Cli,
    pcap: &Option<PathBuf>,
    space: u64,
    offset: usize,
) -> Result<(), AppError> {
    let addresses: Vec<MacAddress> = match pcap {
        Some(path) => {
            let bytes = std::fs::read(path)?;
            let cap = macrand::pcap::parse_capture(&bytes)
                .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
            let (frames, _) = parse_all(&cap);
            let set: BTreeSet<MacAddress> = frames
                .iter()
                .filter_map(|f| f.source)
                .filter(|a| classify_bits(*a) == AddressClass::LocalUnicast)
                .collect();
            set.into_iter().collect()
        }
        None => {
            let store = CatalogStore::open(&cli.catalog).map_err(|e| AppError::input(e.to_string()))?;
            let set: BTreeSet<MacAddress> = store
                .load_records()?
                .iter()
                .flat_map(|r| r.addresses.iter().copied())
                .filter(|a| classify_bits(*a) == AddressClass::LocalUnicast)
                .collect();
            set.into_iter().collect()
        }
    };
    if addresses.is_empty() {
        return Err(AppError::input("no locally assigned addresses to test"));
    }

    let mut report = randtest::collision_stats(&addresses, space);
    let bits = randtest::mac_bitstream(&addresses);
    let fips = randtest::fips_suite_at(&bits, offset);
    report.fips = fips.as_ref().ok().cloned();

    if cli.json {
        println!("{}", serde_json::to_string(&report).unwrap());
    } else {
        print_randomness(&report);
        if let Err(e) = fips {
            println!("fips: skipped ({e})");
        }
    }
    Ok(())
}

fn parse_oui(s: &str) -> Result<[u8; 3], AppError> {
    let parts: Vec<&str> = s.split([':', '-']).collect();
    if parts.len() != 3 {
        return Err(AppError::usage(format!("bad OUI {s:?}: want XX:XX:XX")));
    }
    let mut oui = [0u8; 3];
    for (i, p) in parts.iter().enumerate() {
        oui[i] = u8::from_str_radix(p, 16)
            .map_err(|_| AppError::usage(format!("bad OUI {s:?}: want XX:XX:XX")))?;
    }
    Ok(oui)
}

fn cmd_rainbow(
    cli: &Cli,
    ouis: &[String],
    table: &Path,
    suffix_bits: u32,
    lookup: &Option<String>,
) -> Result<(), AppError> {
    if !ouis.is_empty() {
        if !(1..=24).contains(&suffix_bits) {
            return Err(AppError::usage("--suffix-bits must be in 1..=24"));
        }
        let ouis: Vec<[u8; 3]> = ouis.iter().map(|s| parse_oui(s)).collect::<Result<_, _>>()?;
        let info = build_rainbow_table(&ouis, table, suffix_bits)
            .map_err(|e| AppError::input(e.to_string()))?;
        if !cli.json {
            println!(
                "built {}: {} OUI(s), {} record(s)",
                table.display(),
                info.ouis.len(),
                info.record_count
            );
        }
    }
    if let Some(hexuuid) = lookup {
        let raw = hex::decode(hexuuid)
            .map_err(|_| AppError::usage("lookup UUID must be 32 hex chars"))?;
        let uuid: [u8; 16] = raw
            .try_into()
            .map_err(|_| AppError::usage("lookup UUID must be 32 hex chars"))?;
        let mut t = RainbowTable::open(table).map_err(|e| AppError::input(e.to_string()))?;
        match t.reverse_uuid(&uuid).map_err(|e| AppError::input(e.to_string()))? {
            Some(rev) if rev.degenerate => println!("degenerate (shared wpa_supplicant example UUID)"),
            Some(rev) => println!("{}", rev.mac),
            None => println!("not found"),
        }
    } else if ouis.is_empty() {
        return Err(AppError::usage("rainbow needs --oui ... to build or --lookup to query"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// text rendering

fn print_bin_report(report: &macrand::classify::BinReport) {
    println!("bin                        devices");
    for bin in Bin::ALL {
        let n = report.counts.get(&bin).copied().unwrap_or(0);
        println!("{:<26} {n:>7}", format!("{bin:?}"));
    }
    println!("{:<26} {:>7}", "total", report.corpus_total);
    println!(
        "global {}  local {}  unlinked-random {}",
        report.global_total, report.local_total, report.unlinked_random
    );
}

fn print_matrix(outcome: &macrand::derandomize::DerandOutcome) {
    const METHODS: [LinkMethod; 4] = [
        LinkMethod::SeqChain,
        LinkMethod::UuidReversal,
        LinkMethod::AuthAssoc,
        LinkMethod::Type6Correlation,
    ];
    println!("{} link(s), {} ambiguous join(s) rejected", outcome.links.len(), outcome.ambiguities.len());
    if !outcome.reversal_ran {
        println!("reversal: skipped (no rainbow table)");
    }
    println!("{:<26} {:>9} {:>9} {:>9} {:>9}", "bin", "SeqChain", "Reversal", "AuthAssoc", "Type6");
    for (bin, row) in &outcome.matrix {
        print!("{:<26}", format!("{bin:?}"));
        for m in METHODS {
            match row.get(&m) {
                Some(n) => print!(" {n:>9}"),
                None if m == LinkMethod::UuidReversal && !outcome.reversal_ran => {
                    print!(" {:>9}", "skip")
                }
                None => print!(" {:>9}", "-"),
            }
        }
        println!();
    }
}

fn print_randomness(r: &randtest::RandomnessReport) {
    println!("randomness: n = {} addresses, m = {}", r.n, r.m);
    println!(
        "  collisions: expected {:.1}, observed {}",
        r.expected_collisions, r.observed_collisions
    );
    println!(
        "  triples:    expected {:.2}, observed {}",
        r.expected_triples, r.observed_triples
    );
    match &r.fips {
        None => println!("  fips: not run (stream shorter than 20,000 bits)"),
        Some(f) => {
            let verdict = |b: bool| if b { "pass" } else { "FAIL" };
            println!("  monobit: {} ({})", f.monobit.statistic, verdict(f.monobit.pass));
            println!("  poker:   {:.2} ({})", f.poker.statistic, verdict(f.poker.pass));
            let zeros: Vec<String> = f.runs_zero.iter().map(|t| t.statistic.to_string()).collect();
            let ones: Vec<String> = f.runs_one.iter().map(|t| t.statistic.to_string()).collect();
            println!(
                "  runs(0): {} ({})",
                zeros.join(", "),
                verdict(f.runs_zero.iter().all(|t| t.pass))
            );
            println!(
                "  runs(1): {} ({})",
                ones.join(", "),
                verdict(f.runs_one.iter().all(|t| t.pass))
            );
            println!(
                "  longest run: {} ({})",
                f.longest_run.statistic,
                verdict(f.longest_run.pass)
            );
            println!("  suite: {}", verdict(f.pass()));
        }
    }
}

use thiserror::Error;

/// Errors raised while loading or parsing capture files and frames.
#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("unsupported link type {0} (expected 105 or 127)")]
    UnsupportedLinkType(u32),
    #[error("truncated pcap global header")]
    TruncatedHeader,
    #[error("truncated pcap record at index {index}")]
    TruncatedRecord { index: usize },
    #[error("bad pcap magic {0:#010x}")]
    BadMagic(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("malformed frame: {0}")]
    MalformedFrame(&'static str),
    #[error("frame shorter than minimum header ({0} bytes)")]
    TooShort(usize),
}

#[derive(Debug, Error)]
pub enum WpsError {
    #[error("not a WPS vendor IE")]
    NotWps,
}

#[derive(Debug, Error)]
pub enum SignatureError {
    #[error("frame kind {0:?} carries no device signature")]
    WrongFrameKind(crate::capture::FrameKind),
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("rainbow table corrupt: {0}")]
    CorruptTable(String),
    #[error("interrupted build; partial per-OUI files retained under {0}")]
    InterruptedBuild(String),
    #[error("malformed Type 6 payload: {0} bytes (expected 6)")]
    MalformedType6(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum RandTestError {
    #[error("bit stream too short: {0} bits (need 20000)")]
    ShortStream(usize),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scripts {0} and {1} share global MAC {2}")]
    ScriptConflict(String, String, crate::address::MacAddress),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate prefix {0}")]
    DuplicatePrefix(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

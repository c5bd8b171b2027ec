//! Persistent JSON-lines catalog: device records, link results, parsed
//! frames, and a run manifest recording inputs and thresholds.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capture::ManagementFrame;
use crate::classify::DeviceRecord;
use crate::derandomize::LinkResult;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const LINKS_FILE: &str = "links.jsonl";
pub const FRAMES_FILE: &str = "frames.jsonl";
pub const MANIFEST_FILE: &str = "meta.json";
const LOCK_FILE: &str = "catalog.lock";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    /// Every threshold that shaped the results, stringified.
    pub thresholds: BTreeMap<String, String>,
    /// Input path -> SHA-256 of the file contents.
    pub inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Directory-backed store with a single-writer lock file. The lock is taken
/// on `open_writable` and released on drop.
pub struct CatalogStore {
    dir: PathBuf,
    lock: Option<PathBuf>,
}

impl CatalogStore {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            lock: None,
        })
    }

    pub fn open_writable(dir: &Path) -> std::io::Result<Self> {
        let mut store = Self::open(dir)?;
        let lock = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::AlreadyExists,
                    format!(
                        "catalog {} is locked by another writer (remove {} if stale)",
                        dir.display(),
                        lock.display()
                    ),
                ));
            }
            Err(e) => return Err(e),
        }
        store.lock = Some(lock);
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_jsonl<T: Serialize>(&self, name: &str, items: &[T]) -> std::io::Result<()> {
        let tmp = self.dir.join(format!("{name}.tmp"));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for item in items {
                serde_json::to_writer(&mut w, item)?;
                writeln!(w)?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, self.dir.join(name))
    }

    fn read_jsonl<T: DeserializeOwned>(&self, name: &str) -> std::io::Result<Vec<T>> {
        let path = self.dir.join(name);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), i + 1),
                )
            })?);
        }
        Ok(out)
    }

    pub fn save_records(&self, records: &[DeviceRecord]) -> std::io::Result<()> {
        self.write_jsonl(RECORDS_FILE, records)
    }

    pub fn load_records(&self) -> std::io::Result<Vec<DeviceRecord>> {
        self.read_jsonl(RECORDS_FILE)
    }

    pub fn save_links(&self, links: &[LinkResult]) -> std::io::Result<()> {
        self.write_jsonl(LINKS_FILE, links)
    }

    pub fn load_links(&self) -> std::io::Result<Vec<LinkResult>> {
        self.read_jsonl(LINKS_FILE)
    }

    pub fn save_frames(&self, frames: &[ManagementFrame]) -> std::io::Result<()> {
        self.write_jsonl(FRAMES_FILE, frames)
    }

    pub fn load_frames(&self) -> std::io::Result<Vec<ManagementFrame>> {
        self.read_jsonl(FRAMES_FILE)
    }

    pub fn save_manifest(&self, manifest: &Manifest) -> std::io::Result<()> {
        let tmp = self.dir.join("meta.json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(manifest)?)?;
        fs::rename(&tmp, self.dir.join(MANIFEST_FILE))
    }

    pub fn load_manifest(&self) -> std::io::Result<Option<Manifest>> {
        let path = self.dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_slice(&fs::read(path)?)?))
    }
}

impl Drop for CatalogStore {
    fn drop(&mut self) {
        if let Some(lock) = &self.lock {
            let _ = fs::remove_file(lock);
        }
    }
}

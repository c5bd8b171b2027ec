//! Precomputed UUID-E -> MAC tables with sorted fixed-width records and
//! file-backed binary search.
//!
//! On-disk layout, all integers little-endian:
//!   32-byte header: magic `DRNDUUID`, u32 version, u32 OUI count,
//!                   u64 record count, 8 reserved bytes
//!   OUI list: 3 bytes each, zero-padded to an 8-byte boundary
//!   records: 22 bytes each (16-byte uuid_e, 6-byte MAC), strictly
//!            ascending by uuid_e

use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};

use crate::address::MacAddress;
use crate::error::TableError;

use super::uuid_e::{is_degenerate, uuid_e_from_mac};

pub const TABLE_MAGIC: &[u8; 8] = b"DRNDUUID";
pub const TABLE_VERSION: u32 = 1;
pub const RECORD_LEN: usize = 22;
const HEADER_LEN: usize = 32;

#[derive(Debug, Clone)]
pub struct TableInfo {
    pub ouis: Vec<[u8; 3]>,
    pub record_count: u64,
    pub suffix_bits: u32,
}

/// Builds a sorted table for every address under the given OUIs. `suffix_bits`
/// limits the per-OUI suffix space (24 = the full 2^24 low bytes; smaller
/// values keep test builds desk-scale). Per-OUI part files are retained so an
/// interrupted build resumes without recomputing finished OUIs.
pub fn build_rainbow_table(
    ouis: &[[u8; 3]],
    out: &Path,
    suffix_bits: u32,
) -> Result<TableInfo, TableError> {
    assert!(suffix_bits >= 1 && suffix_bits <= 24, "suffix_bits in 1..=24");
    let mut ouis: Vec<[u8; 3]> = ouis.to_vec();
    ouis.sort();
    ouis.dedup();

    let per_oui = 1u64 << suffix_bits;
    let mut parts: Vec<PathBuf> = Vec::with_capacity(ouis.len());
    for oui in &ouis {
        let part = part_path(out, oui, suffix_bits);
        if !part_complete(&part, per_oui) {
            build_part(oui, suffix_bits, &part)?;
        }
        parts.push(part);
    }

    merge_parts(&ouis, &parts, per_oui, out)?;
    for part in &parts {
        let _ = std::fs::remove_file(part);
    }
    Ok(TableInfo {
        record_count: per_oui * ouis.len() as u64,
        ouis,
        suffix_bits,
    })
}

fn part_path(out: &Path, oui: &[u8; 3], suffix_bits: u32) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(format!(
        ".oui-{:02x}{:02x}{:02x}-{}.part",
        oui[0], oui[1], oui[2], suffix_bits
    ));
    PathBuf::from(name)
}

fn part_complete(part: &Path, per_oui: u64) -> bool {
    std::fs::metadata(part).map(|m| m.len() == per_oui * RECORD_LEN as u64).unwrap_or(false)
}

fn build_part(oui: &[u8; 3], suffix_bits: u32, part: &Path) -> Result<(), TableError> {
    let per_oui = 1u64 << suffix_bits;
    let mut records: Vec<[u8; RECORD_LEN]> = Vec::with_capacity(per_oui as usize);
    for suffix in 0..per_oui {
        let mac = MacAddress([
            oui[0],
            oui[1],
            oui[2],
            (suffix >> 16) as u8,
            (suffix >> 8) as u8,
            suffix as u8,
        ]);
        let uuid = uuid_e_from_mac(mac);
        let mut rec = [0u8; RECORD_LEN];
        rec[..16].copy_from_slice(&uuid);
        rec[16..].copy_from_slice(mac.as_bytes());
        records.push(rec);
    }
    records.sort_unstable();

    let tmp = part.with_extension("part.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for rec in &records {
            w.write_all(rec)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, part)?;
    Ok(())
}

/// K-way merge of sorted per-OUI part files into the final table.
fn merge_parts(
    ouis: &[[u8; 3]],
    parts: &[PathBuf],
    per_oui: u64,
    out: &Path,
) -> Result<(), TableError> {
    let record_count = per_oui * parts.len() as u64;
    let mut writer = BufWriter::new(File::create(out)?);

    let mut header = [0u8; HEADER_LEN];
    header[..8].copy_from_slice(TABLE_MAGIC);
    LittleEndian::write_u32(&mut header[8..12], TABLE_VERSION);
    LittleEndian::write_u32(&mut header[12..16], ouis.len() as u32);
    LittleEndian::write_u64(&mut header[16..24], record_count);
    writer.write_all(&header)?;

    let mut oui_block: Vec<u8> = ouis.iter().flatten().copied().collect();
    while oui_block.len() % 8 != 0 {
        oui_block.push(0);
    }
    writer.write_all(&oui_block)?;

    let mut readers: Vec<_> = parts
        .iter()
        .map(|p| File::open(p).map(std::io::BufReader::new))
        .collect::<Result<_, _>>()?;
    let mut heads: Vec<Option<[u8; RECORD_LEN]>> = Vec::with_capacity(readers.len());
    for r in readers.iter_mut() {
        heads.push(read_record(r)?);
    }
    loop {
        let mut min_idx = None;
        for (i, head) in heads.iter().enumerate() {
            if let Some(rec) = head {
                match min_idx {
                    None => min_idx = Some(i),
                    Some(j) => {
                        let cur: &[u8; RECORD_LEN] = heads[j].as_ref().unwrap();
                        if rec < cur {
                            min_idx = Some(i);
                        }
                    }
                }
            }
        }
        let Some(i) = min_idx else { break };
        let rec = heads[i].take().unwrap();
        writer.write_all(&rec)?;
        heads[i] = read_record(&mut readers[i])?;
    }
    writer.flush()?;
    Ok(())
}

fn read_record<R: Read>(r: &mut R) -> Result<Option<[u8; RECORD_LEN]>, TableError> {
    let mut rec = [0u8; RECORD_LEN];
    let mut filled = 0;
    while filled < RECORD_LEN {
        let n = r.read(&mut rec[filled..])?;
        if n == 0 {
            if filled == 0 {
                return Ok(None);
            }
            return Err(TableError::CorruptTable("partial record at end of part".into()));
        }
        filled += n;
    }
    Ok(Some(rec))
}

/// Read-only handle over a table file; lookups binary-search on disk.
pub struct RainbowTable {
    file: File,
    record_count: u64,
    records_offset: u64,
    pub ouis: Vec<[u8; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reversal {
    pub mac: MacAddress,
    /// The shared wpa_supplicant example UUID; a hit identifies a firmware
    /// constant, not a unique device.
    pub degenerate: bool,
}

impl RainbowTable {
    pub fn open(path: &Path) -> Result<Self, TableError> {
        let mut file = File::open(path)?;
        let mut header = [0u8; HEADER_LEN];
        file.read_exact(&mut header)?;
        if &header[..8] != TABLE_MAGIC {
            return Err(TableError::CorruptTable("bad magic".into()));
        }
        let version = LittleEndian::read_u32(&header[8..12]);
        if version != TABLE_VERSION {
            return Err(TableError::CorruptTable(format!("unsupported version {version}")));
        }
        let oui_count = LittleEndian::read_u32(&header[12..16]) as usize;
        let record_count = LittleEndian::read_u64(&header[16..24]);
        let mut oui_block_len = oui_count * 3;
        if oui_block_len % 8 != 0 {
            oui_block_len += 8 - oui_block_len % 8;
        }
        let mut oui_block = vec![0u8; oui_block_len];
        file.read_exact(&mut oui_block)?;
        let ouis = oui_block[..oui_count * 3]
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        Ok(Self {
            file,
            record_count,
            records_offset: (HEADER_LEN + oui_block_len) as u64,
            ouis,
        })
    }

    pub fn record_count(&self) -> u64 {
        self.record_count
    }

    fn record_at(&mut self, idx: u64) -> Result<[u8; RECORD_LEN], TableError> {
        let mut rec = [0u8; RECORD_LEN];
        self.file
            .seek(SeekFrom::Start(self.records_offset + idx * RECORD_LEN as u64))?;
        self.file.read_exact(&mut rec)?;
        Ok(rec)
    }

    /// Binary search by uuid_e. A non-empty result is re-hashed; a record
    /// whose MAC does not reproduce the query uuid means a corrupt table.
    pub fn reverse_uuid(&mut self, uuid: &[u8; 16]) -> Result<Option<Reversal>, TableError> {
        if self.record_count == 0 {
            return Ok(None);
        }
        // Cheap sort-order sanity probe on the extremes.
        let first = self.record_at(0)?;
        let last = self.record_at(self.record_count - 1)?;
        if first[..16] > last[..16] {
            return Err(TableError::CorruptTable("records not sorted".into()));
        }

        let mut lo = 0u64;
        let mut hi = self.record_count;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let rec = self.record_at(mid)?;
            match rec[..16].cmp(&uuid[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => {
                    let mac = MacAddress::from_slice(&rec[16..]).unwrap();
                    if &uuid_e_from_mac(mac) != uuid {
                        return Err(TableError::CorruptTable(format!(
                            "record {mid} fails re-hash verification"
                        )));
                    }
                    return Ok(Some(Reversal {
                        mac,
                        degenerate: is_degenerate(uuid),
                    }));
                }
            }
        }
        Ok(None)
    }
}

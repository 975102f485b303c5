//! On-disk resonance cache and the tabular formats the CLI writes.
//!
//! Entries live in one directory, one JSON file per key. The file name is
//! the SHA-256 of the key, the body carries the key again (a mismatch means
//! a stale or colliding file) and a SHA-256 of the payload's canonical JSON.
//! Writes go to a temporary file in the same directory and are renamed into
//! place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::radial::{BoundaryCondition, ResonanceSet};
use crate::{Error, Result, VERSION};

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "RESRIG_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheKey {
    pub d: u32,
    pub rho: f64,
    pub bc: BoundaryCondition,
    pub l_max: u32,
    pub version: String,
}

impl CacheKey {
    pub fn new(d: u32, rho: f64, bc: BoundaryCondition, l_max: u32) -> Self {
        Self {
            d,
            rho,
            bc,
            l_max,
            version: VERSION.to_string(),
        }
    }

    fn file_name(&self) -> String {
        let json = serde_json::to_string(self).expect("cache key serializes");
        format!("{}.json", sha256_hex(json.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub checksum: String,
    pub payload: ResonanceSet,
}

impl CacheEntry {
    pub fn new(key: CacheKey, payload: ResonanceSet) -> Self {
        let checksum = payload_checksum(&payload);
        Self { key, checksum, payload }
    }

    pub fn is_intact(&self) -> bool {
        payload_checksum(&self.payload) == self.checksum
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn payload_checksum(set: &ResonanceSet) -> String {
    sha256_hex(serde_json::to_string(set).expect("resonance set serializes").as_bytes())
}

/// What a lookup found.
#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Hit(ResonanceSet),
    Miss,
    /// A file was present but unusable; the reason is for logs.
    Rejected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Computed,
    /// Recomputed after discarding a bad entry.
    Repaired,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonanceCache {
    dir: PathBuf,
}

impl ResonanceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$RESRIG_CACHE_DIR`, else `$XDG_CACHE_HOME/resrig`, else
    /// `$HOME/.cache/resrig`, else a directory under the system temp dir.
    pub fn from_env() -> Self {
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()) {
            return Self::new(dir);
        }
        if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
            return Self::new(PathBuf::from(xdg).join("resrig"));
        }
        if let Some(home) = std::env::var_os("HOME").filter(|v| !v.is_empty()) {
            return Self::new(PathBuf::from(home).join(".cache").join("resrig"));
        }
        Self::new(std::env::temp_dir().join("resrig-cache"))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn load(&self, key: &CacheKey) -> Lookup {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Lookup::Miss,
            Err(e) => return Lookup::Rejected(format!("unreadable: {e}")),
        };
        let entry: CacheEntry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => return Lookup::Rejected(format!("malformed: {e}")),
        };
        if &entry.key != key {
            return Lookup::Rejected("key mismatch".into());
        }
        if !entry.is_intact() {
            return Lookup::Rejected("checksum mismatch".into());
        }
        Lookup::Hit(entry.payload)
    }

    pub fn store(&self, key: &CacheKey, set: &ResonanceSet) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let entry = CacheEntry::new(key.clone(), set.clone());
        let body = serde_json::to_vec(&entry).map_err(|e| Error::parse("cache entry", e.to_string()))?;
        let path = self.path_for(key);
        write_atomic(&path, &body)?;
        Ok(path)
    }

    /// Cached set for `key`, computing and storing it when absent or bad.
    pub fn get_or_compute<F>(&self, key: &CacheKey, compute: F) -> Result<(ResonanceSet, CacheStatus)>
    where
        F: FnOnce() -> Result<ResonanceSet>,
    {
        let status = match self.load(key) {
            Lookup::Hit(set) => return Ok((set, CacheStatus::Hit)),
            Lookup::Miss => CacheStatus::Computed,
            Lookup::Rejected(_) => CacheStatus::Repaired,
        };
        let set = compute()?;
        self.store(key, &set)?;
        Ok((set, status))
    }
}

/// Writes through a temporary file in the target's directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Output formats

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u64,
    pub mode: u32,
}

/// Document written by `resrig resonances`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceDocument {
    pub version: String,
    pub d: u32,
    pub rho: f64,
    pub bc: BoundaryCondition,
    pub l_max: u32,
    pub distinct: usize,
    pub total_multiplicity: u64,
    pub resonances: Vec<ResonanceRecord>,
}

impl ResonanceDocument {
    pub fn from_set(set: &ResonanceSet) -> Self {
        Self {
            version: VERSION.to_string(),
            d: set.dimension,
            rho: set.radius,
            bc: set.bc,
            l_max: set.l_max,
            distinct: set.len(),
            total_multiplicity: set.total_multiplicity(),
            resonances: set
                .iter()
                .map(|r| ResonanceRecord {
                    re: r.value.re,
                    im: r.value.im,
                    multiplicity: r.multiplicity,
                    mode: r.mode,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// Numeric CSV with a header row; every cell at 17 significant digits.
pub fn write_numeric_csv<W: Write>(mut out: W, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

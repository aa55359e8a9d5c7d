//! Persistent cache of orbits, residues and bisection state.
//!
//! Entries are plain text files: a checksum header followed by the
//! payload. Writes go through a temp file and an atomic rename, so
//! concurrent processes sharing a cache directory never observe partial
//! entries; entries are immutable once written. Payloads use decimal
//! strings throughout, which keeps them portable across precisions.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// FNV-1a, 64-bit. Strictly an integrity check against torn files.
fn fnv64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in data {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Cache key; rendered into a filename that is unique per logical entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CacheKey {
    /// Final residue for (p, q, eps) under a given precision schedule.
    Residue { p: u64, q: u64, eps: String, schedule: String },
    /// Converged orbit at an exact precision tier.
    Orbit { p: u64, q: u64, eps: String, digits: u32 },
    /// Bisection state for a critical-function run.
    Bisection { omega: String, target_digits: u32 },
}

impl CacheKey {
    fn file_name(&self) -> String {
        let (kind, body) = match self {
            CacheKey::Residue { p, q, eps, schedule } => {
                ("residue", format!("{p}_{q}_{eps}_{schedule}"))
            }
            CacheKey::Orbit { p, q, eps, digits } => ("orbit", format!("{p}_{q}_{eps}_{digits}")),
            CacheKey::Bisection { omega, target_digits } => {
                ("bisect", format!("{omega}_{target_digits}"))
            }
        };
        let short: String = body.chars().filter(|c| c.is_ascii_alphanumeric()).take(40).collect();
        format!("{kind}_{short}_{:016x}.txt", fnv64(body.as_bytes()))
    }
}

#[derive(Debug)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.root.join(key.file_name())
    }

    /// Fetch and verify an entry. Corrupt entries read as absent.
    pub fn get(&self, key: &CacheKey) -> Option<String> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        let (header, payload) = text.split_once('\n')?;
        let sum = header.strip_prefix("fnv64:")?;
        let expect = u64::from_str_radix(sum, 16).ok()?;
        (fnv64(payload.as_bytes()) == expect).then(|| payload.to_string())
    }

    /// Store an entry: write-temp, checksum, rename. Existing entries are
    /// left untouched (first writer wins; all writers compute the same
    /// bytes anyway).
    pub fn put(&self, key: &CacheKey, payload: &str) -> io::Result<()> {
        let path = self.path_for(key);
        if path.exists() {
            return Ok(());
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let body = format!("fnv64:{:016x}\n{payload}", fnv64(payload.as_bytes()));
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Overwrite (used only for resumable job state, which grows
    /// monotonically and is self-consistent at every step).
    pub fn put_state(&self, key: &CacheKey, payload: &str) -> io::Result<()> {
        let path = self.path_for(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let body = format!("fnv64:{:016x}\n{payload}", fnv64(payload.as_bytes()));
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

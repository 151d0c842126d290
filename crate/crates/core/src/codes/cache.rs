//! On-disk cache for spectra and large syndrome tables.
//!
//! Spectrum files are little-endian: the magic `DHTSPEC1`, an 8-byte
//! content hash, the length `n` as a u64, then `n + 1` u64 counts.
//! Syndrome tables use the magic `DHTSTAB1`, the hash, then one u64 leader
//! per syndrome.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::decode::{SyndromeTable, LARGE_TABLE_BITS};
use super::spectrum::{
    coset_leader_spectrum_with, weight_distribution_with, zero_region_spectrum_with, CosetSpectrum,
    WeightDistribution,
};
use super::{hash_matrix, truncate_digest, LinearCode, TieRule};
use crate::error::{Error, Result};
use crate::gf2::GF2Matrix;
use crate::par::Execution;

pub const CACHE_ENV: &str = "DHT_CACHE_DIR";
const SPECTRUM_MAGIC: &[u8; 8] = b"DHTSPEC1";
const TABLE_MAGIC: &[u8; 8] = b"DHTSTAB1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
}

#[derive(Clone, Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
    exec: Execution,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            exec: Execution::default(),
        }
    }

    /// `$DHT_CACHE_DIR`, falling back to `dht-cache` under the system
    /// temporary directory.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(std::env::temp_dir().join("dht-cache")),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn coset_leader_spectrum(
        &self,
        code: &LinearCode,
        tie: TieRule,
    ) -> Result<(CosetSpectrum, CacheStatus)> {
        let key = content_key("cosets", &[code.generator(), code.parity_check()], tie);
        let (counts, status) =
            self.counts(key, || Ok(coset_leader_spectrum_with(code, tie, self.exec)?.counts().to_vec()))?;
        Ok((CosetSpectrum::from_counts(counts)?, status))
    }

    pub fn zero_region_spectrum(
        &self,
        gq: &LinearCode,
        hb: &GF2Matrix,
        tie: TieRule,
    ) -> Result<(CosetSpectrum, CacheStatus)> {
        let key = content_key("zero-region", &[gq.generator(), gq.parity_check(), hb], tie);
        let (counts, status) = self.counts(key, || {
            Ok(zero_region_spectrum_with(gq, hb, tie, self.exec)?.counts().to_vec())
        })?;
        Ok((CosetSpectrum::from_counts(counts)?, status))
    }

    pub fn weight_distribution(&self, code: &LinearCode) -> Result<(WeightDistribution, CacheStatus)> {
        let key = content_key("weights", &[code.generator(), code.parity_check()], TieRule::default());
        let (counts, status) =
            self.counts(key, || Ok(weight_distribution_with(code, self.exec)?.counts().to_vec()))?;
        Ok((WeightDistribution::from_counts(counts)?, status))
    }

    /// Loads or builds a syndrome table with redundancy up to
    /// [`LARGE_TABLE_BITS`] and installs it as the code's decoder.
    pub fn install_large_table(&self, code: &LinearCode, tie: TieRule) -> Result<CacheStatus> {
        let key = content_key("table", &[code.generator(), code.parity_check()], tie);
        let path = self.path(key, "stab");
        if path.is_file() {
            let leaders = read_table(&path, key)?;
            code.install_table(SyndromeTable::from_leaders(code, tie, leaders)?)?;
            return Ok(CacheStatus::Hit);
        }
        let table = SyndromeTable::build(code, tie, LARGE_TABLE_BITS)?;
        self.write_atomic(&path, |w| {
            w.write_all(TABLE_MAGIC)?;
            w.write_all(&key.to_le_bytes())?;
            for l in table.leaders() {
                w.write_all(&l.to_le_bytes())?;
            }
            Ok(())
        })?;
        code.install_table(table)?;
        Ok(CacheStatus::Miss)
    }

    fn path(&self, key: u64, ext: &str) -> PathBuf {
        self.dir.join(format!("{key:016x}.{ext}"))
    }

    fn counts(
        &self,
        key: u64,
        compute: impl FnOnce() -> Result<Vec<u64>>,
    ) -> Result<(Vec<u64>, CacheStatus)> {
        let path = self.path(key, "spec");
        if path.is_file() {
            return Ok((read_spectrum(&path, key)?, CacheStatus::Hit));
        }
        let counts = compute()?;
        self.write_atomic(&path, |w| {
            w.write_all(SPECTRUM_MAGIC)?;
            w.write_all(&key.to_le_bytes())?;
            w.write_all(&((counts.len() - 1) as u64).to_le_bytes())?;
            for c in &counts {
                w.write_all(&c.to_le_bytes())?;
            }
            Ok(())
        })?;
        Ok((counts, CacheStatus::Miss))
    }

    /// Writes through a temporary file and a rename so readers never see
    /// a partial file.
    fn write_atomic(
        &self,
        path: &Path,
        body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Hash of a kind tag, the matrices and the tie rule.
fn content_key(kind: &str, matrices: &[&GF2Matrix], tie: TieRule) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(kind.as_bytes());
    hasher.update([0u8]);
    for m in matrices {
        hash_matrix(&mut hasher, m);
    }
    hasher.update(tie.tag().as_bytes());
    truncate_digest(hasher)
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_header(r: &mut impl Read, magic: &[u8; 8], key: u64, path: &Path) -> Result<()> {
    let corrupt = |what: &str| Error::Cache(format!("{}: {what}", path.display()));
    let mut found = [0u8; 8];
    r.read_exact(&mut found).map_err(|_| corrupt("truncated header"))?;
    if &found != magic {
        return Err(corrupt("bad magic"));
    }
    if read_u64(r).map_err(|_| corrupt("truncated header"))? != key {
        return Err(corrupt("content hash mismatch"));
    }
    Ok(())
}

fn read_spectrum(path: &Path, key: u64) -> Result<Vec<u64>> {
    let corrupt = |what: &str| Error::Cache(format!("{}: {what}", path.display()));
    let mut r = BufReader::new(fs::File::open(path)?);
    read_header(&mut r, SPECTRUM_MAGIC, key, path)?;
    let n = read_u64(&mut r).map_err(|_| corrupt("truncated header"))?;
    if n > 64 {
        return Err(corrupt("length above 64"));
    }
    let counts = (0..=n)
        .map(|_| read_u64(&mut r))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|_| corrupt("truncated counts"))?;
    if r.read(&mut [0u8])? != 0 {
        return Err(corrupt("trailing bytes"));
    }
    Ok(counts)
}

fn read_table(path: &Path, key: u64) -> Result<Vec<u64>> {
    let mut r = BufReader::new(fs::File::open(path)?);
    read_header(&mut r, TABLE_MAGIC, key, path)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Cache(format!("{}: truncated table", path.display())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

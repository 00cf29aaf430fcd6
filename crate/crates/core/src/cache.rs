//! On-disk cache of mollifier tables.
//!
//! One `.mtab` file per key: `#`-prefixed header lines (format version, key, sha256 of the data
//! section, metadata, certificate) followed by CSV rows `t,weight,phi,err`. Floats are written
//! in shortest round-trip form so a reload is bit-identical.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mollifier::{MollifierTable, TableCertificate, TableKey};

const MAGIC: &str = "# ultralab-mtab 1";
const EXT: &str = "mtab";

#[derive(Serialize, Deserialize)]
struct Meta {
    g: u32,
    scale: f64,
    radius: f64,
}

/// Directory of cached tables.
#[derive(Clone, Debug)]
pub struct TableCache {
    dir: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// First 16 hex digits of the sha256 of the key's JSON.
pub fn key_hash(key: &TableKey) -> String {
    let json = serde_json::to_string(key).expect("table keys serialise");
    sha256_hex(json.as_bytes())[..16].to_string()
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file_name(key: &TableKey) -> String {
        format!("{}_m{}_n{}_{}.{EXT}", key.kind, key.m, key.n, key_hash(key))
    }

    pub fn path(&self, key: &TableKey) -> PathBuf {
        self.dir.join(Self::file_name(key))
    }

    /// `Ok(None)` when absent, `CacheCorrupt` when present but unusable.
    pub fn load(&self, key: &TableKey) -> Result<Option<MollifierTable>> {
        let path = self.path(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let table = decode(&bytes).map_err(|e| Error::CacheCorrupt(format!("{}: {e}", path.display())))?;
        if table.key != *key {
            return Err(Error::CacheCorrupt(format!("{}: key mismatch", path.display())));
        }
        Ok(Some(table))
    }

    /// Writes to a temporary file in the same directory, then renames over the target.
    pub fn store(&self, table: &MollifierTable) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(&table.key);
        let tmp = self.dir.join(format!(".{}.{}.tmp", Self::file_name(&table.key), std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&encode(table)?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

fn encode(table: &MollifierTable) -> Result<Vec<u8>> {
    let mut data = String::from("t,weight,phi,err\n");
    for i in 0..table.t.len() {
        data.push_str(&format!("{:?},{:?},{:?},{:?}\n", table.t[i], table.weights[i], table.phi[i], table.err[i]));
    }
    let meta = Meta { g: table.g, scale: table.scale, radius: table.radius };
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# key {}\n", serde_json::to_string(&table.key)?));
    out.push_str(&format!("# sha256 {}\n", sha256_hex(data.as_bytes())));
    out.push_str(&format!("# meta {}\n", serde_json::to_string(&meta)?));
    out.push_str(&format!("# certificate {}\n", serde_json::to_string(&table.certificate)?));
    out.push_str(&data);
    Ok(out.into_bytes())
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, tag: &str) -> std::result::Result<&'a str, String> {
    let line = lines.next().ok_or_else(|| format!("missing {tag} line"))?;
    line.strip_prefix(&format!("# {tag} ")).ok_or_else(|| format!("expected {tag} line"))
}

fn decode(bytes: &[u8]) -> std::result::Result<MollifierTable, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
    let mut offset = 0;
    let mut head = Vec::new();
    for _ in 0..5 {
        let end = text[offset..].find('\n').ok_or("truncated header")? + offset;
        head.push(&text[offset..end]);
        offset = end + 1;
    }
    if head[0] != MAGIC {
        return Err("unknown format".into());
    }
    let mut it = head[1..].iter().copied();
    let key: TableKey = serde_json::from_str(header(&mut it, "key")?).map_err(|e| e.to_string())?;
    let sha = header(&mut it, "sha256")?;
    let meta: Meta = serde_json::from_str(header(&mut it, "meta")?).map_err(|e| e.to_string())?;
    let certificate: TableCertificate =
        serde_json::from_str(header(&mut it, "certificate")?).map_err(|e| e.to_string())?;
    let data = &text[offset..];
    if sha256_hex(data.as_bytes()) != sha {
        return Err("data hash mismatch".into());
    }
    let mut rdr = csv::Reader::from_reader(data.as_bytes());
    let (mut t, mut weights, mut phi, mut err) = (vec![], vec![], vec![], vec![]);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let vals: Vec<f64> =
            rec.iter().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|e| format!("{e}"))?;
        if vals.len() != 4 {
            return Err("row width".into());
        }
        t.push(vals[0]);
        weights.push(vals[1]);
        phi.push(vals[2]);
        err.push(vals[3]);
    }
    if t.is_empty() {
        return Err("no rows".into());
    }
    Ok(MollifierTable { key, g: meta.g, scale: meta.scale, radius: meta.radius, t, weights, phi, err, certificate })
}

/// Outcome of [`cache_gc`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcSummary {
    pub scanned: usize,
    pub kept: usize,
    pub removed: Vec<String>,
    pub reclaimed_bytes: u64,
}

/// Removes `.mtab` files that fail verification and leftover temporary files.
pub fn cache_gc(dir: &Path) -> Result<GcSummary> {
    let mut summary = GcSummary::default();
    if !dir.exists() {
        return Ok(summary);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let is_tmp = name.starts_with('.') && name.ends_with(".tmp");
        let is_table = path.extension().is_some_and(|e| e == EXT);
        if !path.is_file() || !(is_tmp || is_table) {
            continue;
        }
        summary.scanned += 1;
        let valid = is_table
            && fs::read(&path)
                .ok()
                .and_then(|b| decode(&b).ok())
                .is_some_and(|t| TableCache::file_name(&t.key) == name);
        if valid {
            summary.kept += 1;
        } else {
            let size = fs::metadata(&path)?.len();
            fs::remove_file(&path)?;
            summary.reclaimed_bytes += size;
            summary.removed.push(name);
        }
    }
    Ok(summary)
}

//! On-disk distance tables.
//!
//! Layout (little-endian):
//!
//! ```text
//! 0   12  magic  b"PANCAKE-DIST"
//! 12  4   format version (u32)
//! 16  1   graph tag
//! 17  4   n (u32)
//! 21  8   state count (u64)
//! 29  ..  one distance byte per state
//! end 8   checksum: first 8 bytes of SHA-256 over everything before it
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use pancake_core::oracle::{DistanceTable, GraphId};
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 12] = b"PANCAKE-DIST";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 29;
const CHECKSUM_LEN: usize = 8;

/// Environment variable naming the cache directory when no flag is given.
pub const CACHE_DIR_ENV: &str = "PANCAKE_CACHE_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("table file too short ({0} bytes)")]
    Truncated(usize),
    #[error("not a distance table file")]
    BadMagic,
    #[error("unsupported table format version {0}")]
    Version(u32),
    #[error("table header is for {found}, expected {expected}")]
    HeaderMismatch { expected: String, found: String },
    #[error("table checksum mismatch")]
    Checksum,
    #[error("table content rejected: {0}")]
    Content(#[from] pancake_core::Error),
}

fn checksum(bytes: &[u8]) -> [u8; CHECKSUM_LEN] {
    let digest = Sha256::digest(bytes);
    let mut out = [0u8; CHECKSUM_LEN];
    out.copy_from_slice(&digest[..CHECKSUM_LEN]);
    out
}

pub fn encode(table: &DistanceTable) -> Vec<u8> {
    let dist = table.as_bytes();
    let mut buf = Vec::with_capacity(HEADER_LEN + dist.len() + CHECKSUM_LEN);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(table.graph().tag());
    buf.extend_from_slice(&(table.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(dist.len() as u64).to_le_bytes());
    buf.extend_from_slice(dist);
    let sum = checksum(&buf);
    buf.extend_from_slice(&sum);
    buf
}

/// Parses a table file, trusting it only if every header field matches.
pub fn decode(bytes: &[u8], graph: GraphId, n: usize) -> Result<DistanceTable, CacheError> {
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(CacheError::Truncated(bytes.len()));
    }
    if &bytes[..12] != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    if version != VERSION {
        return Err(CacheError::Version(version));
    }
    let found_graph = GraphId::from_tag(bytes[16]);
    let found_n = u32::from_le_bytes(bytes[17..21].try_into().unwrap()) as usize;
    if found_graph != Some(graph) || found_n != n {
        return Err(CacheError::HeaderMismatch {
            expected: format!("{graph} n={n}"),
            found: match found_graph {
                Some(g) => format!("{g} n={found_n}"),
                None => format!("graph tag {} n={found_n}", bytes[16]),
            },
        });
    }
    let count = u64::from_le_bytes(bytes[21..29].try_into().unwrap());
    let body_end = bytes.len() - CHECKSUM_LEN;
    if (body_end - HEADER_LEN) as u64 != count {
        return Err(CacheError::Truncated(bytes.len()));
    }
    if checksum(&bytes[..body_end]) != bytes[body_end..] {
        return Err(CacheError::Checksum);
    }
    Ok(DistanceTable::from_parts(
        graph,
        n,
        bytes[HEADER_LEN..body_end].to_vec(),
    )?)
}

/// A directory of table files, one per `(graph, n)`.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, graph: GraphId, n: usize) -> PathBuf {
        self.dir.join(format!("{}-{n}.dist", graph.name()))
    }

    /// `Ok(None)` when no file exists; an error when one exists but is unusable.
    pub fn load(&self, graph: GraphId, n: usize) -> Result<Option<DistanceTable>, CacheError> {
        let path = self.path(graph, n);
        match fs::read(&path) {
            Ok(bytes) => decode(&bytes, graph, n).map(Some),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(CacheError::Io { path, source }),
        }
    }

    /// Writes through a temporary file so readers never see a partial table.
    pub fn store(&self, table: &DistanceTable) -> Result<PathBuf, CacheError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CacheError::Io { path, source }
        };
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let path = self.path(table.graph(), table.n());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, encode(table)).map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        Ok(path)
    }
}

/// Flag value, else `$PANCAKE_CACHE_DIR`, else `$XDG_CACHE_HOME/pancake`, else `~/.cache/pancake`.
pub fn resolve_cache_dir(flag: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = flag {
        return Some(p.to_path_buf());
    }
    let env = |name| std::env::var_os(name).filter(|v| !v.is_empty());
    if let Some(p) = env(CACHE_DIR_ENV) {
        return Some(p.into());
    }
    if let Some(p) = env("XDG_CACHE_HOME") {
        return Some(PathBuf::from(p).join("pancake"));
    }
    env("HOME").map(|h| PathBuf::from(h).join(".cache").join("pancake"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pancake_core::oracle::{build_table, Budget};

    #[test]
    fn round_trip() {
        let t = build_table(GraphId::Pstar, 3, Budget::DEFAULT).unwrap();
        let bytes = encode(&t);
        assert_eq!(&bytes[..12], MAGIC);
        assert_eq!(bytes.len(), HEADER_LEN + 48 + CHECKSUM_LEN);
        assert_eq!(decode(&bytes, GraphId::Pstar, 3).unwrap(), t);
    }

    #[test]
    fn rejects_mismatch_and_corruption() {
        let t = build_table(GraphId::G, 4, Budget::DEFAULT).unwrap();
        let bytes = encode(&t);
        assert!(matches!(
            decode(&bytes, GraphId::P, 4),
            Err(CacheError::HeaderMismatch { .. })
        ));
        assert!(matches!(
            decode(&bytes, GraphId::G, 5),
            Err(CacheError::HeaderMismatch { .. })
        ));
        let mut bad = bytes.clone();
        bad[HEADER_LEN + 3] ^= 1;
        assert!(matches!(decode(&bad, GraphId::G, 4), Err(CacheError::Checksum)));
        let mut bad = bytes.clone();
        bad[12] = 9;
        assert!(matches!(decode(&bad, GraphId::G, 4), Err(CacheError::Version(9))));
        assert!(matches!(
            decode(&bytes[..20], GraphId::G, 4),
            Err(CacheError::Truncated(20))
        ));
        assert!(matches!(decode(&[0; 64], GraphId::G, 4), Err(CacheError::BadMagic)));
    }
}

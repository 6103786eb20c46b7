//! Content-addressed blob storage for papers and review comments.
//!
//! Blobs are keyed by the lowercase hex SHA-256 of their bytes. Every read
//! re-hashes the blob, so a corrupted backend is detected rather than trusted.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("refusing to store an empty blob")]
    EmptyBlob,
    #[error("blob {0} not found")]
    NotFound(ContentAddress),
    #[error("stored bytes for {0} no longer match their address")]
    IntegrityFailure(ContentAddress),
    #[error("invalid content address `{0}`")]
    BadAddress(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Lowercase hex SHA-256 digest of a blob.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ContentAddress(String);

impl ContentAddress {
    pub fn of(bytes: &[u8]) -> Self {
        ContentAddress(hex::encode(Sha256::digest(bytes)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn matches(&self, bytes: &[u8]) -> bool {
        ContentAddress::of(bytes) == *self
    }
}

impl fmt::Display for ContentAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ContentAddress {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ok = s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if ok {
            Ok(ContentAddress(s.to_string()))
        } else {
            Err(StoreError::BadAddress(s.to_string()))
        }
    }
}

impl TryFrom<String> for ContentAddress {
    type Error = StoreError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ContentAddress> for String {
    fn from(addr: ContentAddress) -> String {
        addr.0
    }
}

pub trait BlobStore {
    fn put(&self, blob: &[u8]) -> Result<ContentAddress, StoreError>;
    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StoreError>;
}

/// One file per blob at `<root>/<first two hex chars>/<digest>`.
#[derive(Debug, Clone)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(DirStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, addr: &ContentAddress) -> PathBuf {
        self.root.join(&addr.as_str()[..2]).join(addr.as_str())
    }
}

impl BlobStore for DirStore {
    fn put(&self, blob: &[u8]) -> Result<ContentAddress, StoreError> {
        if blob.is_empty() {
            return Err(StoreError::EmptyBlob);
        }
        let addr = ContentAddress::of(blob);
        let path = self.path_of(&addr);
        if path.exists() {
            return Ok(addr);
        }
        let dir = path.parent().expect("blob path has a shard directory");
        fs::create_dir_all(dir)?;
        // Write-then-rename keeps concurrent puts of the same digest benign.
        let mut tmp = tempfile_in(dir)?;
        tmp.1.write_all(blob)?;
        tmp.1.sync_all()?;
        drop(tmp.1);
        fs::rename(&tmp.0, &path)?;
        Ok(addr)
    }

    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StoreError> {
        let bytes = match fs::read(self.path_of(addr)) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(addr.clone()))
            }
            Err(e) => return Err(e.into()),
        };
        if !addr.matches(&bytes) {
            return Err(StoreError::IntegrityFailure(addr.clone()));
        }
        Ok(bytes)
    }
}

fn tempfile_in(dir: &Path) -> io::Result<(PathBuf, fs::File)> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    loop {
        let n = COUNTER.fetch_add(1, Ordering::Relaxed);
        let path = dir.join(format!(".tmp-{}-{n}", std::process::id()));
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(f) => return Ok((path, f)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
}

/// In-memory backend with the same verification behaviour.
#[derive(Debug, Default)]
pub struct MemStore {
    blobs: RwLock<HashMap<ContentAddress, Vec<u8>>>,
}

impl MemStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.blobs.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Overwrites the stored bytes without updating the key.
    #[doc(hidden)]
    pub fn corrupt(&self, addr: &ContentAddress, bytes: Vec<u8>) {
        self.blobs
            .write()
            .expect("store lock")
            .insert(addr.clone(), bytes);
    }
}

impl BlobStore for MemStore {
    fn put(&self, blob: &[u8]) -> Result<ContentAddress, StoreError> {
        if blob.is_empty() {
            return Err(StoreError::EmptyBlob);
        }
        let addr = ContentAddress::of(blob);
        self.blobs
            .write()
            .expect("store lock")
            .entry(addr.clone())
            .or_insert_with(|| blob.to_vec());
        Ok(addr)
    }

    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StoreError> {
        let blobs = self.blobs.read().expect("store lock");
        let bytes = blobs
            .get(addr)
            .ok_or_else(|| StoreError::NotFound(addr.clone()))?;
        if !addr.matches(bytes) {
            return Err(StoreError::IntegrityFailure(addr.clone()));
        }
        Ok(bytes.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_is_idempotent_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        let a = store.put(b"a paper").unwrap();
        let b = store.put(b"a paper").unwrap();
        assert_eq!(a, b);
        assert_eq!(store.get(&a).unwrap(), b"a paper");
        let path = store.path_of(&a);
        assert_eq!(
            path.parent().unwrap().file_name().unwrap(),
            &a.as_str()[..2]
        );
    }

    #[test]
    fn empty_blob_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        assert!(matches!(store.put(b""), Err(StoreError::EmptyBlob)));
        assert!(matches!(
            MemStore::new().put(b""),
            Err(StoreError::EmptyBlob)
        ));
    }

    #[test]
    fn unknown_digest_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        let addr = ContentAddress::of(b"never stored");
        assert!(matches!(store.get(&addr), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn tampered_file_fails_integrity() {
        let dir = tempfile::tempdir().unwrap();
        let store = DirStore::open(dir.path()).unwrap();
        let addr = store.put(b"original comment").unwrap();
        fs::write(store.path_of(&addr), b"edited comment").unwrap();
        assert!(matches!(
            store.get(&addr),
            Err(StoreError::IntegrityFailure(_))
        ));

        let mem = MemStore::new();
        let addr = mem.put(b"x").unwrap();
        mem.corrupt(&addr, b"y".to_vec());
        assert!(matches!(
            mem.get(&addr),
            Err(StoreError::IntegrityFailure(_))
        ));
    }

    #[test]
    fn address_parsing() {
        let addr = ContentAddress::of(b"abc");
        assert_eq!(
            addr.as_str(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(addr.as_str().parse::<ContentAddress>().unwrap(), addr);
        assert!("ABC".parse::<ContentAddress>().is_err());
    }
}

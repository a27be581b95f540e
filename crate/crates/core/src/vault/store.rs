use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use sha2::{Digest, Sha256};

use super::cipher::ProfileCiphertext;
use crate::error::{Error, Result};

/// SHA-256 of a ciphertext's byte encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentId(pub [u8; 32]);

impl ContentId {
    pub fn of(bytes: &[u8]) -> Self {
        ContentId(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s.trim(), &mut out)
            .map_err(|_| Error::Malformed("content id is not 64 hex digits"))?;
        Ok(ContentId(out))
    }
}

impl fmt::Debug for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentId({})", self.to_hex())
    }
}

impl fmt::Display for ContentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Immutable blobs addressed by their hash.
pub trait ContentStore: Send + Sync {
    fn put(&self, ct: &ProfileCiphertext) -> Result<ContentId>;
    fn get(&self, cid: &ContentId) -> Result<ProfileCiphertext>;
}

#[derive(Default)]
pub struct MemoryStore {
    blobs: RwLock<HashMap<ContentId, Vec<u8>>>,
}

impl MemoryStore {
    /// Snapshot of every stored blob.
    pub fn blobs(&self) -> Vec<Vec<u8>> {
        self.blobs
            .read()
            .expect("store poisoned")
            .values()
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.blobs.read().expect("store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ContentStore for MemoryStore {
    fn put(&self, ct: &ProfileCiphertext) -> Result<ContentId> {
        let bytes = ct.to_bytes();
        let cid = ContentId::of(&bytes);
        self.blobs
            .write()
            .expect("store poisoned")
            .entry(cid)
            .or_insert(bytes);
        Ok(cid)
    }

    fn get(&self, cid: &ContentId) -> Result<ProfileCiphertext> {
        let blobs = self.blobs.read().expect("store poisoned");
        let bytes = blobs.get(cid).ok_or(Error::NotFound)?;
        ProfileCiphertext::from_bytes(bytes)
    }
}

/// One file per blob, named by the lowercase hex content id.
#[derive(Debug)]
pub struct DirStore {
    root: PathBuf,
}

impl DirStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(Self {
            root: root.as_ref().to_path_buf(),
        })
    }

    fn path(&self, cid: &ContentId) -> PathBuf {
        self.root.join(cid.to_hex())
    }
}

impl ContentStore for DirStore {
    fn put(&self, ct: &ProfileCiphertext) -> Result<ContentId> {
        let bytes = ct.to_bytes();
        let cid = ContentId::of(&bytes);
        let path = self.path(&cid);
        if !path.exists() {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, &bytes)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(cid)
    }

    fn get(&self, cid: &ContentId) -> Result<ProfileCiphertext> {
        let bytes = match fs::read(self.path(cid)) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => return Err(Error::NotFound),
            Err(e) => return Err(e.into()),
        };
        if ContentId::of(&bytes) != *cid {
            return Err(Error::Malformed(
                "stored blob does not match its content id",
            ));
        }
        ProfileCiphertext::from_bytes(&bytes)
    }
}

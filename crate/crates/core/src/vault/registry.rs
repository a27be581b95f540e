use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use rand::{CryptoRng, RngCore};

use super::signature::{self, Signature};
use super::store::ContentId;
use crate::error::{Error, Result};
use crate::group::{KeyPair, PrimeOrderGroup, ENCODED_LEN};

const ENTRY_DOMAIN: &[u8] = b"privrba-v1-registry-entry";

/// A signed binding `owner → cid` at a given counter.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct RegistryEntry<G: PrimeOrderGroup> {
    pub owner: G::Element,
    pub cid: ContentId,
    pub counter: u64,
    pub signature: Signature<G>,
}

impl<G: PrimeOrderGroup> RegistryEntry<G> {
    fn signed_message(owner: &G::Element, cid: &ContentId, counter: u64) -> Vec<u8> {
        let mut msg = Vec::with_capacity(ENTRY_DOMAIN.len() + 2 * ENCODED_LEN + 8);
        msg.extend_from_slice(ENTRY_DOMAIN);
        msg.extend_from_slice(&G::encode(owner));
        msg.extend_from_slice(&cid.0);
        msg.extend_from_slice(&counter.to_be_bytes());
        msg
    }

    pub fn sign<R: RngCore + CryptoRng + ?Sized>(
        key: &KeyPair<G>,
        cid: ContentId,
        counter: u64,
        rng: &mut R,
    ) -> Self {
        let msg = Self::signed_message(key.public(), &cid, counter);
        let signature = signature::sign(key, &msg, rng);
        Self {
            owner: *key.public(),
            cid,
            counter,
            signature,
        }
    }

    pub fn verify(&self) -> bool {
        let msg = Self::signed_message(&self.owner, &self.cid, self.counter);
        signature::verify(&self.owner, &msg, &self.signature)
    }

    /// Journal line: `owner cid counter signature`, hex fields separated by spaces.
    fn to_line(self) -> String {
        format!(
            "{} {} {} {}\n",
            hex::encode(G::encode(&self.owner)),
            self.cid.to_hex(),
            self.counter,
            hex::encode(self.signature.to_bytes())
        )
    }

    fn from_line(line: &str) -> Result<Self> {
        let bad = || Error::Malformed("registry journal line");
        let mut parts = line.split_ascii_whitespace();
        let mut owner = [0u8; ENCODED_LEN];
        hex::decode_to_slice(parts.next().ok_or_else(bad)?, &mut owner).map_err(|_| bad())?;
        let cid = ContentId::from_hex(parts.next().ok_or_else(bad)?)?;
        let counter = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let sig = hex::decode(parts.next().ok_or_else(bad)?).map_err(|_| bad())?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Self {
            owner: G::decode(&owner)?,
            cid,
            counter,
            signature: Signature::from_bytes(&sig)?,
        })
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for RegistryEntry<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegistryEntry")
            .field("owner", &hex::encode(G::encode(&self.owner)))
            .field("cid", &self.cid)
            .field("counter", &self.counter)
            .finish()
    }
}

/// Latest signed entry per owner, optionally journaled to disk.
///
/// Entries must verify under their owner key and carry a counter strictly
/// greater than the one already held, which blocks rollback to an older cid.
pub struct Registry<G: PrimeOrderGroup> {
    latest: RwLock<HashMap<[u8; ENCODED_LEN], RegistryEntry<G>>>,
    journal: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl<G: PrimeOrderGroup> Registry<G> {
    pub fn in_memory() -> Self {
        Self {
            latest: RwLock::new(HashMap::new()),
            journal: None,
            path: None,
        }
    }

    /// Opens (or creates) an append-only journal and replays it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut latest = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry = RegistryEntry::<G>::from_line(&line)?;
                Self::admit(&latest, &entry)?;
                latest.insert(G::encode(&entry.owner), entry);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            latest: RwLock::new(latest),
            journal: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn admit(
        latest: &HashMap<[u8; ENCODED_LEN], RegistryEntry<G>>,
        entry: &RegistryEntry<G>,
    ) -> Result<()> {
        if !entry.verify() {
            return Err(Error::BadSignature);
        }
        let held = latest
            .get(&G::encode(&entry.owner))
            .map_or(0, |e| e.counter);
        if entry.counter <= held {
            return Err(Error::StaleCounter {
                got: entry.counter,
                latest: held,
            });
        }
        Ok(())
    }

    /// Validates and records an entry.
    pub fn submit(&self, entry: RegistryEntry<G>) -> Result<()> {
        let mut latest = self.latest.write().expect("registry poisoned");
        Self::admit(&latest, &entry)?;
        if let Some(journal) = &self.journal {
            let mut f = journal.lock().expect("journal poisoned");
            f.write_all(entry.to_line().as_bytes())?;
            f.flush()?;
        }
        latest.insert(G::encode(&entry.owner), entry);
        Ok(())
    }

    pub fn latest(&self, owner: &G::Element) -> Option<RegistryEntry<G>> {
        self.latest
            .read()
            .expect("registry poisoned")
            .get(&G::encode(owner))
            .copied()
    }

    pub fn counter(&self, owner: &G::Element) -> u64 {
        self.latest(owner).map_or(0, |e| e.counter)
    }
}

/// Signs `owner → cid` at the next counter and submits it.
pub fn registry_update<G, R>(
    registry: &Registry<G>,
    owner: &KeyPair<G>,
    cid: ContentId,
    rng: &mut R,
) -> Result<RegistryEntry<G>>
where
    G: PrimeOrderGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let next = registry.counter(owner.public()) + 1;
    let entry = RegistryEntry::sign(owner, cid, next, rng);
    registry.submit(entry)?;
    Ok(entry)
}

//! Encrypted profile backup and recovery.
//!
//! The profile is sealed with AES-256-GCM under the client's key `S_u`,
//! stored by content address, and the latest address is published in a
//! registry under the client's signing key. A new device holding only
//! `S_u` and the public key can fetch and decrypt the latest backup.

mod cipher;
mod registry;
mod signature;
mod store;

pub use cipher::{
    decrypt_profile, encrypt_profile, ProfileCiphertext, SymmetricKey, NONCE_LEN, TAG_LEN,
};
pub use registry::{registry_update, Registry, RegistryEntry};
pub use signature::{sign, verify, Signature};
pub use store::{ContentId, ContentStore, DirStore, MemoryStore};

use crate::error::Result;
use crate::group::PrimeOrderGroup;
use crate::privacy::FeatureVector;

/// Fetches and decrypts the latest profile published by `owner`.
pub fn recover<G: PrimeOrderGroup, S: ContentStore + ?Sized>(
    registry: &Registry<G>,
    store: &S,
    owner: &G::Element,
    key: &SymmetricKey,
) -> Result<FeatureVector> {
    let entry = registry.latest(owner).ok_or(crate::Error::NotFound)?;
    let ct = store.get(&entry.cid)?;
    decrypt_profile(key, &ct)
}

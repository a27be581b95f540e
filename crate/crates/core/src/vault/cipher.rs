use std::fmt;

use aes_gcm::aead::{Aead, KeyInit};
use aes_gcm::{Aes256Gcm, Nonce};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::privacy::{Bounds, FeatureVector};

pub const NONCE_LEN: usize = 12;
pub const TAG_LEN: usize = 16;

/// The client's 256-bit profile key `S_u`. Exported as raw bytes only.
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey([u8; 32]);

impl SymmetricKey {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        Self(k)
    }

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0
    }
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

/// AES-256-GCM sealed profile: `nonce ∥ body ∥ tag` on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileCiphertext {
    pub nonce: [u8; NONCE_LEN],
    pub body: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl ProfileCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + self.body.len() + TAG_LEN);
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.body);
        out.extend_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(Error::Malformed("profile ciphertext too short"));
        }
        let (nonce, rest) = bytes.split_at(NONCE_LEN);
        let (body, tag) = rest.split_at(rest.len() - TAG_LEN);
        Ok(Self {
            nonce: nonce.try_into().expect("split length"),
            body: body.to_vec(),
            tag: tag.try_into().expect("split length"),
        })
    }
}

/// `n: u32 BE` followed by `(value, lo, hi)` as big-endian f64 triples.
pub(crate) fn serialize_features(v: &FeatureVector) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 24 * v.len());
    out.extend_from_slice(&(v.len() as u32).to_be_bytes());
    for (x, b) in v.values().iter().zip(v.bounds()) {
        for f in [*x, b.lo, b.hi] {
            out.extend_from_slice(&f.to_be_bytes());
        }
    }
    out
}

fn deserialize_features(bytes: &[u8]) -> Result<FeatureVector> {
    let bad = || Error::Malformed("profile plaintext is not a feature vector");
    let n =
        u32::from_be_bytes(bytes.get(..4).ok_or_else(bad)?.try_into().expect("4 bytes")) as usize;
    let rest = &bytes[4..];
    if rest.len() != n.checked_mul(24).ok_or_else(bad)? {
        return Err(bad());
    }
    let mut values = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for triple in rest.chunks_exact(24) {
        let f =
            |i: usize| f64::from_be_bytes(triple[i * 8..i * 8 + 8].try_into().expect("8 bytes"));
        values.push(f(0));
        bounds.push(Bounds::new(f(1), f(2))?);
    }
    FeatureVector::new(values, bounds)
}

/// Seals the profile under a fresh random nonce.
pub fn encrypt_profile<R: RngCore + CryptoRng + ?Sized>(
    key: &SymmetricKey,
    features: &FeatureVector,
    rng: &mut R,
) -> ProfileCiphertext {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let cipher = Aes256Gcm::new((&key.0).into());
    let mut sealed = cipher
        .encrypt(
            Nonce::from_slice(&nonce),
            serialize_features(features).as_slice(),
        )
        .expect("AES-GCM encryption of a small buffer cannot fail");
    let tag: [u8; TAG_LEN] = sealed
        .split_off(sealed.len() - TAG_LEN)
        .try_into()
        .expect("tag length");
    ProfileCiphertext {
        nonce,
        body: sealed,
        tag,
    }
}

/// Opens a sealed profile. Wrong keys and tampering are indistinguishable.
pub fn decrypt_profile(key: &SymmetricKey, ct: &ProfileCiphertext) -> Result<FeatureVector> {
    let cipher = Aes256Gcm::new((&key.0).into());
    let mut sealed = Vec::with_capacity(ct.body.len() + TAG_LEN);
    sealed.extend_from_slice(&ct.body);
    sealed.extend_from_slice(&ct.tag);
    let plain = cipher
        .decrypt(Nonce::from_slice(&ct.nonce), sealed.as_slice())
        .map_err(|_| Error::DecryptionFailed)?;
    deserialize_features(&plain)
}

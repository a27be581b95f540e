//! Blinded OPRF over a prime-order group.
//!
//! The client maps `username ∥ 0x00 ∥ password` into the group, multiplies
//! it by `g^b`, and the server raises the result to its key `x`. Dividing
//! by `y^b = (g^x)^b` leaves `H(U ∥ P)^x`, without the server seeing `H`.

use std::fmt;

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::PrimeOrderGroup;

/// `H(U ∥ P)` as a group element; never the identity.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct CredentialDigest<G: PrimeOrderGroup>(G::Element);

impl<G: PrimeOrderGroup> CredentialDigest<G> {
    /// Wraps an element obtained some other way, e.g. when sweeping a toy group.
    pub fn from_element(e: G::Element) -> Result<Self> {
        if G::is_identity(&e) {
            return Err(Error::Malformed("credential digest is the identity"));
        }
        Ok(Self(e))
    }

    pub fn element(&self) -> &G::Element {
        &self.0
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for CredentialDigest<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CredentialDigest(..)")
    }
}

/// Hashes the credential pair into the group.
///
/// A `0x00` separator keeps `("alice", "pw")` and `("alic", "epw")` apart.
pub fn derive_digest<G: PrimeOrderGroup>(
    username: &str,
    password: &str,
) -> Result<CredentialDigest<G>> {
    if username.is_empty() || password.is_empty() {
        return Err(Error::EmptyCredential);
    }
    let mut input = Vec::with_capacity(username.len() + password.len() + 1);
    input.extend_from_slice(username.as_bytes());
    input.push(0x00);
    input.extend_from_slice(password.as_bytes());
    Ok(CredentialDigest(G::hash_to_group(&input)))
}

/// Client-side blinding secret for one OPRF run.
///
/// Neither `Clone` nor serializable; [`unblind`] consumes it.
pub struct BlindingState<G: PrimeOrderGroup> {
    factor: G::Scalar,
    blinded: G::Element,
}

impl<G: PrimeOrderGroup> BlindingState<G> {
    /// `m' = m · g^b`, the only value that leaves the client.
    pub fn blinded(&self) -> &G::Element {
        &self.blinded
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for BlindingState<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlindingState").finish_non_exhaustive()
    }
}

/// `F_x(H(U ∥ P)) = H(U ∥ P)^x`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct OprfOutput<G: PrimeOrderGroup>(G::Element);

impl<G: PrimeOrderGroup> OprfOutput<G> {
    pub fn element(&self) -> &G::Element {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        G::encode(&self.0)
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self> {
        let e = G::decode(bytes)?;
        if G::is_identity(&e) {
            return Err(Error::Malformed("OPRF output is the identity"));
        }
        Ok(Self(e))
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for OprfOutput<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OprfOutput(..)")
    }
}

pub fn blind<G, R>(digest: &CredentialDigest<G>, rng: &mut R) -> BlindingState<G>
where
    G: PrimeOrderGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    blind_with(digest, G::random_scalar(rng))
}

/// Blinds with a caller-chosen factor. A zero factor yields `m' = m`,
/// which is only useful for tests.
pub fn blind_with<G: PrimeOrderGroup>(
    digest: &CredentialDigest<G>,
    factor: G::Scalar,
) -> BlindingState<G> {
    let blinded = G::mul(&digest.0, &G::base_exp(&factor));
    BlindingState { factor, blinded }
}

/// Server half: `(m')^x`. The identity is refused as a malformed input.
pub fn evaluate<G: PrimeOrderGroup>(
    blinded: &G::Element,
    server_key: &G::Scalar,
) -> Result<G::Element> {
    if G::is_identity(blinded) {
        return Err(Error::Malformed("blinded OPRF input is the identity"));
    }
    Ok(G::exp(blinded, server_key))
}

/// Removes `k = y^b` from the evaluation. Nothing is verified here; a wrong
/// evaluation surfaces later as a failed token check.
pub fn unblind<G: PrimeOrderGroup>(
    evaluated: &G::Element,
    server_pub: &G::Element,
    state: BlindingState<G>,
) -> OprfOutput<G> {
    let k = G::exp(server_pub, &state.factor);
    OprfOutput(G::div(evaluated, &k))
}

//! Schnorr signatures over the protocol group, in hash-challenge form.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::{KeyPair, PrimeOrderGroup, ENCODED_LEN};

pub const SIGNATURE_LEN: usize = 2 * ENCODED_LEN;

/// `(R, s)` with `g^s = R · A^c` and `c = H(R ∥ A ∥ msg)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature<G: PrimeOrderGroup> {
    commitment: G::Element,
    response: G::Scalar,
}

impl<G: PrimeOrderGroup> Signature<G> {
    pub fn to_bytes(&self) -> [u8; SIGNATURE_LEN] {
        let mut out = [0u8; SIGNATURE_LEN];
        out[..ENCODED_LEN].copy_from_slice(&G::encode(&self.commitment));
        out[ENCODED_LEN..].copy_from_slice(&G::encode_scalar(&self.response));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != SIGNATURE_LEN {
            return Err(Error::Malformed("signature must be 64 bytes"));
        }
        let commitment = G::decode(bytes[..ENCODED_LEN].try_into().expect("32 bytes"))?;
        let response = G::decode_scalar(bytes[ENCODED_LEN..].try_into().expect("32 bytes"))?;
        Ok(Self {
            commitment,
            response,
        })
    }
}

fn challenge<G: PrimeOrderGroup>(
    commitment: &G::Element,
    public: &G::Element,
    msg: &[u8],
) -> G::Scalar {
    let mut input = Vec::with_capacity(2 * ENCODED_LEN + msg.len());
    input.extend_from_slice(&G::encode(commitment));
    input.extend_from_slice(&G::encode(public));
    input.extend_from_slice(msg);
    G::hash_to_scalar(&input)
}

pub fn sign<G, R>(key: &KeyPair<G>, msg: &[u8], rng: &mut R) -> Signature<G>
where
    G: PrimeOrderGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let k = G::random_scalar(rng);
    let commitment = G::base_exp(&k);
    let c = challenge::<G>(&commitment, key.public(), msg);
    let response = G::scalar_add(&k, &G::scalar_mul(&c, key.secret()));
    Signature {
        commitment,
        response,
    }
}

pub fn verify<G: PrimeOrderGroup>(public: &G::Element, msg: &[u8], sig: &Signature<G>) -> bool {
    if G::is_identity(public) {
        return false;
    }
    let c = challenge::<G>(&sig.commitment, public, msg);
    G::base_exp(&sig.response) == G::mul(&sig.commitment, &G::exp(public, &c))
}

//! Prime-order group abstraction.
//!
//! Every protocol equation is written against [`PrimeOrderGroup`], so the
//! same code runs over [`Ristretto255`] in production and over a tiny
//! [`SmallGroup`] where tests can enumerate every element.

mod ristretto;
mod small;

use std::fmt::Debug;
use std::hash::Hash;

use rand::{CryptoRng, RngCore};

use crate::error::Result;

pub use ristretto::Ristretto255;
pub use small::{SmallGroup, Toy179, Toy23};

/// Size in bytes of every element and scalar encoding.
pub const ENCODED_LEN: usize = 32;

/// A cyclic group of prime order `q` together with its scalar field.
///
/// Implementations are stateless marker types; all operations are
/// associated functions over `Copy` values.
pub trait PrimeOrderGroup:
    Copy + Debug + Default + PartialEq + Eq + Hash + Send + Sync + 'static
{
    type Scalar: Copy + Eq + Debug + Send + Sync;
    type Element: Copy + Eq + Debug + Send + Sync;

    fn generator() -> Self::Element;
    fn identity() -> Self::Element;

    fn exp(e: &Self::Element, s: &Self::Scalar) -> Self::Element;
    fn mul(a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn inv(e: &Self::Element) -> Self::Element;
    fn is_identity(e: &Self::Element) -> bool {
        *e == Self::identity()
    }

    /// Maps arbitrary bytes to a non-identity element.
    fn hash_to_group(data: &[u8]) -> Self::Element;
    /// Maps arbitrary bytes to a scalar (used for signature challenges).
    fn hash_to_scalar(data: &[u8]) -> Self::Scalar;

    fn encode(e: &Self::Element) -> [u8; ENCODED_LEN];
    fn decode(bytes: &[u8; ENCODED_LEN]) -> Result<Self::Element>;

    /// Uniform scalar in `[1, q-1]`.
    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self::Scalar;
    fn scalar_from_u64(v: u64) -> Self::Scalar;
    fn scalar_add(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_neg(a: &Self::Scalar) -> Self::Scalar;
    fn scalar_is_zero(a: &Self::Scalar) -> bool {
        *a == Self::scalar_from_u64(0)
    }
    /// 32-byte little-endian encoding.
    fn encode_scalar(s: &Self::Scalar) -> [u8; ENCODED_LEN];
    fn decode_scalar(bytes: &[u8; ENCODED_LEN]) -> Result<Self::Scalar>;

    /// `g^s`.
    fn base_exp(s: &Self::Scalar) -> Self::Element {
        Self::exp(&Self::generator(), s)
    }

    /// `a / b`, realized as `a · b⁻¹`.
    fn div(a: &Self::Element, b: &Self::Element) -> Self::Element {
        Self::mul(a, &Self::inv(b))
    }
}

/// A `(private, public)` pair with `public = g^private`.
#[derive(Clone, Copy)]
pub struct KeyPair<G: PrimeOrderGroup> {
    secret: G::Scalar,
    public: G::Element,
}

impl<G: PrimeOrderGroup> KeyPair<G> {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        Self::from_secret(G::random_scalar(rng))
    }

    pub fn from_secret(secret: G::Scalar) -> Self {
        Self {
            secret,
            public: G::base_exp(&secret),
        }
    }

    pub fn secret(&self) -> &G::Scalar {
        &self.secret
    }

    pub fn public(&self) -> &G::Element {
        &self.public
    }
}

impl<G: PrimeOrderGroup> Debug for KeyPair<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public", &hex::encode(G::encode(&self.public)))
            .finish_non_exhaustive()
    }
}

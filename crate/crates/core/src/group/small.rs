use rand::{CryptoRng, Rng, RngCore};
use sha2::{Digest, Sha256};

use super::{PrimeOrderGroup, ENCODED_LEN};
use crate::error::{Error, Result};

const HASH_TO_GROUP_DST: &[u8] = b"privrba-v1-h2g-small";
const HASH_TO_SCALAR_DST: &[u8] = b"privrba-v1-h2s-small";

/// The order-`Q` subgroup of quadratic residues modulo the safe prime
/// `P = 2Q + 1`, generated by `GEN`.
///
/// Insecure by construction: this exists so that protocol algebra can be
/// checked exhaustively over every element and exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SmallGroup<const P: u64, const Q: u64, const GEN: u64>;

/// Order 23 inside `Z_47^*`.
pub type Toy23 = SmallGroup<47, 23, 4>;
/// Order 179 inside `Z_359^*`.
pub type Toy179 = SmallGroup<359, 179, 4>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallElement(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallScalar(pub u64);

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

fn low_u64(bytes: &[u8]) -> u64 {
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&bytes[..8]);
    u64::from_le_bytes(buf)
}

impl<const P: u64, const Q: u64, const GEN: u64> SmallGroup<P, Q, GEN> {
    /// Every element of the group, identity first.
    pub fn elements() -> impl Iterator<Item = SmallElement> {
        (0..Q).map(|k| SmallElement(pow_mod(GEN, k, P)))
    }

    /// Every scalar `0..Q`.
    pub fn scalars() -> impl Iterator<Item = SmallScalar> {
        (0..Q).map(SmallScalar)
    }

    pub const fn order() -> u64 {
        Q
    }

    pub const fn modulus() -> u64 {
        P
    }
}

impl<const P: u64, const Q: u64, const GEN: u64> PrimeOrderGroup for SmallGroup<P, Q, GEN> {
    type Scalar = SmallScalar;
    type Element = SmallElement;

    fn generator() -> SmallElement {
        SmallElement(GEN)
    }

    fn identity() -> SmallElement {
        SmallElement(1)
    }

    fn exp(e: &SmallElement, s: &SmallScalar) -> SmallElement {
        SmallElement(pow_mod(e.0, s.0, P))
    }

    fn mul(a: &SmallElement, b: &SmallElement) -> SmallElement {
        SmallElement(a.0 * b.0 % P)
    }

    fn inv(e: &SmallElement) -> SmallElement {
        // Fermat inverse in Z_P.
        SmallElement(pow_mod(e.0, P - 2, P))
    }

    fn hash_to_group(data: &[u8]) -> SmallElement {
        for counter in 0u32.. {
            let digest = Sha256::new()
                .chain_update(HASH_TO_GROUP_DST)
                .chain_update(counter.to_be_bytes())
                .chain_update(data)
                .finalize();
            let x = low_u64(&digest) % (P - 1) + 1;
            let e = x * x % P;
            if e != 1 {
                return SmallElement(e);
            }
        }
        unreachable!("hash_to_group exhausted its counter")
    }

    fn hash_to_scalar(data: &[u8]) -> SmallScalar {
        let digest = Sha256::new()
            .chain_update(HASH_TO_SCALAR_DST)
            .chain_update(data)
            .finalize();
        SmallScalar(low_u64(&digest) % Q)
    }

    fn encode(e: &SmallElement) -> [u8; ENCODED_LEN] {
        let mut out = [0u8; ENCODED_LEN];
        out[..8].copy_from_slice(&e.0.to_le_bytes());
        out
    }

    fn decode(bytes: &[u8; ENCODED_LEN]) -> Result<SmallElement> {
        if bytes[8..].iter().any(|&b| b != 0) {
            return Err(Error::Decode);
        }
        let v = low_u64(bytes);
        if v == 0 || v >= P || pow_mod(v, Q, P) != 1 {
            return Err(Error::Decode);
        }
        Ok(SmallElement(v))
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> SmallScalar {
        SmallScalar(rng.gen_range(1..Q))
    }

    fn scalar_from_u64(v: u64) -> SmallScalar {
        SmallScalar(v % Q)
    }

    fn scalar_add(a: &SmallScalar, b: &SmallScalar) -> SmallScalar {
        SmallScalar((a.0 + b.0) % Q)
    }

    fn scalar_mul(a: &SmallScalar, b: &SmallScalar) -> SmallScalar {
        SmallScalar(a.0 * b.0 % Q)
    }

    fn scalar_neg(a: &SmallScalar) -> SmallScalar {
        SmallScalar((Q - a.0) % Q)
    }

    fn encode_scalar(s: &SmallScalar) -> [u8; ENCODED_LEN] {
        let mut out = [0u8; ENCODED_LEN];
        out[..8].copy_from_slice(&s.0.to_le_bytes());
        out
    }

    fn decode_scalar(bytes: &[u8; ENCODED_LEN]) -> Result<SmallScalar> {
        if bytes[8..].iter().any(|&b| b != 0) {
            return Err(Error::ScalarDecode);
        }
        let v = low_u64(bytes);
        if v >= Q {
            return Err(Error::ScalarDecode);
        }
        Ok(SmallScalar(v))
    }
}

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256, Sha512};

use super::{PrimeOrderGroup, ENCODED_LEN};
use crate::error::{Error, Result};

const HASH_TO_GROUP_DST: &[u8] = b"privrba-v1-h2g-ristretto255";
const HASH_TO_SCALAR_DST: &[u8] = b"privrba-v1-h2s-ristretto255";

/// The ristretto255 prime-order group. All operations are constant time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ristretto255;

impl PrimeOrderGroup for Ristretto255 {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    fn generator() -> RistrettoPoint {
        curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn exp(e: &RistrettoPoint, s: &Scalar) -> RistrettoPoint {
        e * s
    }

    fn mul(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn inv(e: &RistrettoPoint) -> RistrettoPoint {
        -e
    }

    fn base_exp(s: &Scalar) -> RistrettoPoint {
        curve25519_dalek::constants::RISTRETTO_BASEPOINT_TABLE * s
    }

    fn hash_to_group(data: &[u8]) -> RistrettoPoint {
        // Two domain-separated SHA-256 outputs feed the 64-byte uniform map.
        // The identity is unreachable in practice; re-hash with a counter anyway.
        for counter in 0u32.. {
            let mut wide = [0u8; 64];
            for (half, chunk) in wide.chunks_exact_mut(32).enumerate() {
                let digest = Sha256::new()
                    .chain_update(HASH_TO_GROUP_DST)
                    .chain_update(counter.to_be_bytes())
                    .chain_update([half as u8])
                    .chain_update(data)
                    .finalize();
                chunk.copy_from_slice(&digest);
            }
            let point = RistrettoPoint::from_uniform_bytes(&wide);
            if point != RistrettoPoint::identity() {
                return point;
            }
        }
        unreachable!("hash_to_group exhausted its counter")
    }

    fn hash_to_scalar(data: &[u8]) -> Scalar {
        let digest = Sha512::new()
            .chain_update(HASH_TO_SCALAR_DST)
            .chain_update(data)
            .finalize();
        let mut wide = [0u8; 64];
        wide.copy_from_slice(&digest);
        Scalar::from_bytes_mod_order_wide(&wide)
    }

    fn encode(e: &RistrettoPoint) -> [u8; ENCODED_LEN] {
        e.compress().to_bytes()
    }

    fn decode(bytes: &[u8; ENCODED_LEN]) -> Result<RistrettoPoint> {
        CompressedRistretto(*bytes)
            .decompress()
            .ok_or(Error::Decode)
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Scalar {
        loop {
            let mut wide = [0u8; 64];
            rng.fill_bytes(&mut wide);
            let s = Scalar::from_bytes_mod_order_wide(&wide);
            if s != Scalar::ZERO {
                return s;
            }
        }
    }

    fn scalar_from_u64(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn scalar_add(a: &Scalar, b: &Scalar) -> Scalar {
        a + b
    }

    fn scalar_mul(a: &Scalar, b: &Scalar) -> Scalar {
        a * b
    }

    fn scalar_neg(a: &Scalar) -> Scalar {
        -a
    }

    fn encode_scalar(s: &Scalar) -> [u8; ENCODED_LEN] {
        s.to_bytes()
    }

    fn decode_scalar(bytes: &[u8; ENCODED_LEN]) -> Result<Scalar> {
        Option::from(Scalar::from_canonical_bytes(*bytes)).ok_or(Error::ScalarDecode)
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;

    type G = Ristretto255;

    #[test]
    fn all_ff_bytes_are_rejected() {
        // 0xFF..FF exceeds the field modulus, so it is never a canonical encoding.
        assert!(matches!(G::decode(&[0xFF; 32]), Err(Error::Decode)));
    }

    #[test]
    fn negative_field_element_is_rejected() {
        // Canonical ristretto encodings have the low bit of byte 0 clear.
        let mut bytes = G::encode(&G::generator());
        bytes[0] |= 1;
        assert!(G::decode(&bytes).is_err());
    }

    #[test]
    fn identity_round_trips() {
        let id = G::identity();
        assert_eq!(G::encode(&id), [0u8; 32]);
        assert!(G::is_identity(&G::decode(&[0u8; 32]).unwrap()));
    }

    #[test]
    fn exponent_arithmetic_is_mod_order() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..50 {
            let e = G::hash_to_group(&rng.next_u64().to_le_bytes());
            let s1 = G::random_scalar(&mut rng);
            let s2 = G::random_scalar(&mut rng);
            assert_eq!(
                G::exp(&G::exp(&e, &s1), &s2),
                G::exp(&e, &G::scalar_mul(&s1, &s2))
            );
            let back = G::mul(&G::exp(&e, &s1), &G::exp(&e, &G::scalar_neg(&s1)));
            assert!(G::is_identity(&back));
        }
    }

    #[test]
    fn base_exp_matches_generic_exp() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let s = G::random_scalar(&mut rng);
        assert_eq!(G::base_exp(&s), G::exp(&G::generator(), &s));
    }

    #[test]
    fn scalar_decode_rejects_unreduced() {
        assert!(matches!(
            G::decode_scalar(&[0xFF; 32]),
            Err(Error::ScalarDecode)
        ));
        let s = G::scalar_from_u64(77);
        assert_eq!(G::decode_scalar(&G::encode_scalar(&s)).unwrap(), s);
    }
}

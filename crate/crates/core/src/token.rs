//! Anonymous session tokens.
//!
//! Per session the client raises both `F = H^x` and `H` to a fresh `t`, and
//! blinds a random session identifier `S` with `g^{b'}`. The server checks
//! `(H^t)^x = F^t`, then answers `T' = F^t · (S · g^{b'})^x`. The client
//! strips `y^{b'}` to get `T = (H^t)^x · S^x`, which the server re-derives
//! when `(T, H^t, S)` is presented.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Mutex;

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::PrimeOrderGroup;
use crate::oprf::{CredentialDigest, OprfOutput};

/// Default capacity of the server's replay window.
pub const DEFAULT_REPLAY_WINDOW: usize = 1 << 16;

/// Step-1 message: `(F^t, H^t, S · g^{b'})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionRequest<G: PrimeOrderGroup> {
    pub blinded_eval: G::Element,
    pub blinded_hash: G::Element,
    pub blinded_session: G::Element,
}

/// Per-session client secrets. The session identifier stays private until
/// the token is presented.
pub struct SessionSecrets<G: PrimeOrderGroup> {
    t: G::Scalar,
    b_prime: G::Scalar,
    session_id: G::Element,
    blinded_hash: G::Element,
}

impl<G: PrimeOrderGroup> SessionSecrets<G> {
    pub fn session_id(&self) -> &G::Element {
        &self.session_id
    }

    pub fn exponent(&self) -> &G::Scalar {
        &self.t
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for SessionSecrets<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionSecrets").finish_non_exhaustive()
    }
}

/// The presented token `(T, H^t, S)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionToken<G: PrimeOrderGroup> {
    pub token: G::Element,
    pub blinded_hash: G::Element,
    pub session_id: G::Element,
}

/// Starts a session from the registered OPRF output.
pub fn new_session<G, R>(
    oprf_out: &OprfOutput<G>,
    digest: &CredentialDigest<G>,
    rng: &mut R,
) -> (SessionRequest<G>, SessionSecrets<G>)
where
    G: PrimeOrderGroup,
    R: RngCore + CryptoRng + ?Sized,
{
    let t = G::random_scalar(rng);
    let b_prime = G::random_scalar(rng);
    let mut seed = [0u8; 32];
    rng.fill_bytes(&mut seed);
    let session_id = G::hash_to_group(&seed);
    new_session_with(oprf_out, digest, t, b_prime, session_id)
}

/// [`new_session`] with every random choice supplied by the caller.
pub fn new_session_with<G: PrimeOrderGroup>(
    oprf_out: &OprfOutput<G>,
    digest: &CredentialDigest<G>,
    t: G::Scalar,
    b_prime: G::Scalar,
    session_id: G::Element,
) -> (SessionRequest<G>, SessionSecrets<G>) {
    let blinded_eval = G::exp(oprf_out.element(), &t);
    let blinded_hash = G::exp(digest.element(), &t);
    let blinded_session = G::mul(&session_id, &G::base_exp(&b_prime));
    let request = SessionRequest {
        blinded_eval,
        blinded_hash,
        blinded_session,
    };
    let secrets = SessionSecrets {
        t,
        b_prime,
        session_id,
        blinded_hash,
    };
    (request, secrets)
}

/// Server side of Step 2: checks the credential relation and returns `T'`.
pub fn issue<G: PrimeOrderGroup>(
    request: &SessionRequest<G>,
    server_key: &G::Scalar,
) -> Result<G::Element> {
    if G::is_identity(&request.blinded_eval)
        || G::is_identity(&request.blinded_hash)
        || G::is_identity(&request.blinded_session)
    {
        return Err(Error::Malformed("session request contains the identity"));
    }
    if G::exp(&request.blinded_hash, server_key) != request.blinded_eval {
        return Err(Error::AuthenticationRejected);
    }
    Ok(G::mul(
        &request.blinded_eval,
        &G::exp(&request.blinded_session, server_key),
    ))
}

/// `T = T' / y^{b'}`.
pub fn unblind_token<G: PrimeOrderGroup>(
    t_prime: &G::Element,
    server_pub: &G::Element,
    secrets: SessionSecrets<G>,
) -> SessionToken<G> {
    let token = G::div(t_prime, &G::exp(server_pub, &secrets.b_prime));
    SessionToken {
        token,
        blinded_hash: secrets.blinded_hash,
        session_id: secrets.session_id,
    }
}

/// Accepts iff `T = (H^t)^x · S^x`. Tokens with identity components never verify.
pub fn verify<G: PrimeOrderGroup>(token: &SessionToken<G>, server_key: &G::Scalar) -> bool {
    if G::is_identity(&token.token)
        || G::is_identity(&token.blinded_hash)
        || G::is_identity(&token.session_id)
    {
        return false;
    }
    let expected = G::mul(
        &G::exp(&token.blinded_hash, server_key),
        &G::exp(&token.session_id, server_key),
    );
    expected == token.token
}

/// Bounded FIFO set of session identifiers already presented.
pub struct ReplayGuard {
    capacity: usize,
    inner: Mutex<ReplayWindow>,
}

#[derive(Default)]
struct ReplayWindow {
    seen: HashSet<[u8; 32]>,
    order: VecDeque<[u8; 32]>,
}

impl ReplayGuard {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay window must hold at least one entry");
        Self {
            capacity,
            inner: Mutex::new(ReplayWindow::default()),
        }
    }

    /// Records `id`, failing if it is already inside the window.
    pub fn check_and_insert(&self, id: [u8; 32]) -> Result<()> {
        let mut w = self.inner.lock().expect("replay window poisoned");
        if w.seen.contains(&id) {
            return Err(Error::ReplayRejected);
        }
        if w.order.len() == self.capacity {
            if let Some(old) = w.order.pop_front() {
                w.seen.remove(&old);
            }
        }
        w.seen.insert(id);
        w.order.push_back(id);
        Ok(())
    }

    pub fn contains(&self, id: &[u8; 32]) -> bool {
        self.inner
            .lock()
            .expect("replay window poisoned")
            .seen
            .contains(id)
    }

    pub fn len(&self) -> usize {
        self.inner
            .lock()
            .expect("replay window poisoned")
            .order
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

impl Default for ReplayGuard {
    fn default() -> Self {
        Self::new(DEFAULT_REPLAY_WINDOW)
    }
}

impl fmt::Debug for ReplayGuard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReplayGuard")
            .field("capacity", &self.capacity)
            .field("len", &self.len())
            .finish()
    }
}

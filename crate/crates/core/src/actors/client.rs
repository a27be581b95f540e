use std::fmt;
use std::time::Instant;

use rand_chacha::ChaCha20Rng;

use super::{Metrics, OpCounts, Transport};
use crate::error::{Error, Result};
use crate::group::{KeyPair, PrimeOrderGroup, ENCODED_LEN};
use crate::oprf::{self, OprfOutput};
use crate::privacy::{privatize, FeatureVector, PrivacyBudget};
use crate::risk::{AuthRequirement, RiskScore};
use crate::token;
use crate::vault::{
    decrypt_profile, encrypt_profile, registry_update, ContentId, ContentStore, ProfileCiphertext,
    Registry, RegistryEntry, SymmetricKey,
};
use crate::wire::{self, Message, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClientPhase {
    Setup,
    Registered,
    SessionPending,
    Authenticated,
}

/// Result of publishing the encrypted profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Registration<G: PrimeOrderGroup> {
    pub cid: ContentId,
    pub entry: RegistryEntry<G>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuthOutcome {
    pub requirement: AuthRequirement,
    pub score: RiskScore,
    pub session_id: [u8; ENCODED_LEN],
}

/// Everything a registered client must keep between runs.
#[derive(Clone, PartialEq, Eq)]
pub struct ClientRecord<G: PrimeOrderGroup> {
    pub sym_key: SymmetricKey,
    pub signing_secret: G::Scalar,
    pub server_pub: G::Element,
    pub oprf_output: OprfOutput<G>,
    pub profile: ProfileCiphertext,
}

impl<G: PrimeOrderGroup> ClientRecord<G> {
    /// `S_u ∥ a ∥ y ∥ F ∥ ciphertext`, each fixed field 32 bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.sym_key.to_bytes());
        out.extend_from_slice(&G::encode_scalar(&self.signing_secret));
        out.extend_from_slice(&G::encode(&self.server_pub));
        out.extend_from_slice(&self.oprf_output.to_bytes());
        out.extend_from_slice(&self.profile.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 * ENCODED_LEN {
            return Err(Error::Malformed("client record too short"));
        }
        let field = |i: usize| -> [u8; ENCODED_LEN] {
            bytes[i * ENCODED_LEN..(i + 1) * ENCODED_LEN]
                .try_into()
                .expect("field width")
        };
        Ok(Self {
            sym_key: SymmetricKey::from_bytes(field(0)),
            signing_secret: G::decode_scalar(&field(1))?,
            server_pub: G::decode(&field(2))?,
            oprf_output: OprfOutput::from_bytes(&field(3))?,
            profile: ProfileCiphertext::from_bytes(&bytes[4 * ENCODED_LEN..])?,
        })
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for ClientRecord<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientRecord").finish_non_exhaustive()
    }
}

/// The user's device.
pub struct Client<G: PrimeOrderGroup> {
    sym_key: SymmetricKey,
    signing: KeyPair<G>,
    server_pub: Option<G::Element>,
    oprf: Option<OprfOutput<G>>,
    profile: Option<ProfileCiphertext>,
    phase: ClientPhase,
    rng: ChaCha20Rng,
    metrics: Metrics,
}

impl<G: PrimeOrderGroup> Client<G> {
    /// Generates `S_u` and the signing pair `(a, A)`.
    pub fn new(mut rng: ChaCha20Rng) -> Self {
        let start = Instant::now();
        let sym_key = SymmetricKey::generate(&mut rng);
        let signing = KeyPair::generate(&mut rng);
        let metrics = Metrics {
            ops: Self::setup_ops(),
            compute: start.elapsed(),
        };
        Self {
            sym_key,
            signing,
            server_pub: None,
            oprf: None,
            profile: None,
            phase: ClientPhase::Setup,
            rng,
            metrics,
        }
    }

    /// Operations spent by [`Client::new`].
    pub fn setup_ops() -> OpCounts {
        OpCounts {
            symmetric_keygens: 1,
            asymmetric_keygens: 1,
            ..OpCounts::default()
        }
    }

    pub fn from_record(record: ClientRecord<G>, rng: ChaCha20Rng) -> Self {
        Self {
            sym_key: record.sym_key,
            signing: KeyPair::from_secret(record.signing_secret),
            server_pub: Some(record.server_pub),
            oprf: Some(record.oprf_output),
            profile: Some(record.profile),
            phase: ClientPhase::Registered,
            rng,
            metrics: Metrics::default(),
        }
    }

    /// `None` until registration has completed.
    pub fn record(&self) -> Option<ClientRecord<G>> {
        Some(ClientRecord {
            sym_key: self.sym_key.clone(),
            signing_secret: *self.signing.secret(),
            server_pub: self.server_pub?,
            oprf_output: self.oprf?,
            profile: self.profile.clone()?,
        })
    }

    pub fn phase(&self) -> ClientPhase {
        self.phase
    }

    /// Owner key under which profile backups are published.
    pub fn owner(&self) -> &G::Element {
        self.signing.public()
    }

    pub fn symmetric_key(&self) -> &SymmetricKey {
        &self.sym_key
    }

    pub fn pinned_server_key(&self) -> Option<&G::Element> {
        self.server_pub.as_ref()
    }

    pub fn profile_ciphertext(&self) -> Option<&ProfileCiphertext> {
        self.profile.as_ref()
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    pub fn take_metrics(&mut self) -> Metrics {
        std::mem::take(&mut self.metrics)
    }

    /// Setup: evaluates the OPRF on `(username, password)` with the server,
    /// encrypts `features` under `S_u` and publishes the ciphertext.
    ///
    /// The server key in the greeting is pinned for later sessions.
    pub fn register<T: Transport + ?Sized, S: ContentStore + ?Sized>(
        &mut self,
        username: &str,
        password: &str,
        features: &FeatureVector,
        transport: &mut T,
        store: &S,
        registry: &Registry<G>,
    ) -> Result<Registration<G>> {
        let mut clock = Instant::now();
        let server_pub = self.greeting(transport, &mut clock)?;

        let digest = oprf::derive_digest::<G>(username, password)?;
        self.metrics.ops.hashes += 1;
        let state = oprf::blind(&digest, &mut self.rng);
        let reply = self.exchange(
            transport,
            &Message::BlindedOprfInput(G::encode(state.blinded())),
            &mut clock,
        )?;
        let evaluated = match reply {
            Message::OprfEvaluation(e) => G::decode(&e)?,
            other => return Err(unexpected(&other)),
        };
        let output = oprf::unblind(&evaluated, &server_pub, state);
        self.metrics.ops.prf_evaluations += 1;

        self.metrics.ops.feature_extractions += features.len() as u64;
        let ct = encrypt_profile(&self.sym_key, features, &mut self.rng);
        self.metrics.ops.symmetric_encryptions += 1;

        self.server_pub = Some(server_pub);
        self.oprf = Some(output);
        self.profile = Some(ct);
        self.phase = ClientPhase::Registered;
        self.metrics.compute += clock.elapsed();
        self.backup(store, registry)
    }

    /// Publishes the current profile ciphertext under the next registry counter.
    pub fn backup<S: ContentStore + ?Sized>(
        &mut self,
        store: &S,
        registry: &Registry<G>,
    ) -> Result<Registration<G>> {
        let ct = self
            .profile
            .as_ref()
            .ok_or(Error::Protocol("client is not registered".into()))?;
        let cid = store.put(ct)?;
        let entry = registry_update(registry, &self.signing, cid, &mut self.rng)?;
        Ok(Registration { cid, entry })
    }

    /// One authentication session. Fails before any feature data is sent if
    /// the server does not accept the token.
    pub fn authenticate<T: Transport + ?Sized>(
        &mut self,
        username: &str,
        password: &str,
        live: &[f64],
        budget: &PrivacyBudget,
        transport: &mut T,
    ) -> Result<AuthOutcome> {
        let result = self.run_session(username, password, live, budget, transport);
        self.phase = match result {
            Ok(_) => ClientPhase::Authenticated,
            Err(_) => ClientPhase::Registered,
        };
        result
    }

    fn run_session<T: Transport + ?Sized>(
        &mut self,
        username: &str,
        password: &str,
        live: &[f64],
        budget: &PrivacyBudget,
        transport: &mut T,
    ) -> Result<AuthOutcome> {
        let (Some(pinned), Some(output), Some(ct)) =
            (self.server_pub, self.oprf, self.profile.as_ref())
        else {
            return Err(Error::Protocol("client is not registered".into()));
        };
        let mut clock = Instant::now();
        let profile = decrypt_profile(&self.sym_key, ct)?;
        self.metrics.ops.symmetric_decryptions += 1;
        let live = profile.with_values(live.to_vec())?;

        let server_pub = self.greeting(transport, &mut clock)?;
        if server_pub != pinned {
            return Err(Error::Protocol(
                "server key does not match the pinned key".into(),
            ));
        }

        let digest = oprf::derive_digest::<G>(username, password)?;
        self.metrics.ops.hashes += 1;
        let (request, secrets) = token::new_session(&output, &digest, &mut self.rng);
        self.metrics.ops.prf_evaluations += 1;
        self.phase = ClientPhase::SessionPending;
        let msg = Message::SessionRequest([
            G::encode(&request.blinded_eval),
            G::encode(&request.blinded_hash),
            G::encode(&request.blinded_session),
        ]);
        let t_prime = match self.exchange(transport, &msg, &mut clock)? {
            Message::BlindTokenReply(e) => G::decode(&e)?,
            other => return Err(unexpected(&other)),
        };

        let tok = token::unblind_token(&t_prime, &server_pub, secrets);
        let session_id = G::encode(&tok.session_id);
        let msg = Message::TokenPresentation([
            G::encode(&tok.token),
            G::encode(&tok.blinded_hash),
            session_id,
        ]);
        match self.exchange(transport, &msg, &mut clock)? {
            Message::Status(Status::Accepted) => {}
            other => return Err(unexpected(&other)),
        }

        let noisy_profile = privatize(&profile, budget, &mut self.rng);
        let noisy_live = privatize(&live, budget, &mut self.rng);
        self.metrics.ops.noise_additions += 2 * profile.len() as u64;
        let msg = Message::private_features(noisy_profile.values(), noisy_live.values())?;
        let outcome = match self.exchange(transport, &msg, &mut clock)? {
            Message::RiskReply { score, adjustment } => AuthOutcome {
                requirement: AuthRequirement::from_code(adjustment)
                    .ok_or(Error::Malformed("unknown requirement code"))?,
                score: RiskScore::new(wire::decode_risk_score(score)),
                session_id,
            },
            other => return Err(unexpected(&other)),
        };
        self.metrics.compute += clock.elapsed();
        Ok(outcome)
    }

    fn greeting<T: Transport + ?Sized>(
        &mut self,
        transport: &mut T,
        clock: &mut Instant,
    ) -> Result<G::Element> {
        self.metrics.compute += clock.elapsed();
        let frame = transport.receive();
        *clock = Instant::now();
        match wire::decode(&frame?)? {
            Message::ServerPubKey(y) => G::decode(&y),
            other => Err(unexpected(&other)),
        }
    }

    /// Sends one message and decodes the reply. Time spent in the transport
    /// is excluded from the client's compute time.
    fn exchange<T: Transport + ?Sized>(
        &mut self,
        transport: &mut T,
        msg: &Message,
        clock: &mut Instant,
    ) -> Result<Message> {
        let frame = wire::encode(msg);
        self.metrics.compute += clock.elapsed();
        let reply = transport.send(&frame).and_then(|()| transport.receive());
        *clock = Instant::now();
        wire::decode(&reply?)
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for Client<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Client")
            .field("phase", &self.phase)
            .finish_non_exhaustive()
    }
}

fn unexpected(msg: &Message) -> Error {
    match msg {
        Message::Status(Status::AuthenticationRejected) => Error::AuthenticationRejected,
        Message::Status(Status::ReplayRejected) => Error::ReplayRejected,
        Message::Status(s) => Error::Protocol(format!("server replied {s:?}")),
        other => Error::Protocol(format!("unexpected {:?} message", other.kind())),
    }
}

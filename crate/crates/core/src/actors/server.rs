use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{CryptoRng, RngCore};

use super::{AuditEvent, AuditSink, Metrics, NullAudit, OpCounts};
use crate::error::{Error, Result};
use crate::group::{KeyPair, PrimeOrderGroup};
use crate::oprf;
use crate::risk::{self, RiskPolicy};
use crate::token::{self, ReplayGuard, SessionRequest, SessionToken, DEFAULT_REPLAY_WINDOW};
use crate::wire::{self, Message, Status};

/// Long-lived server state shared by all connections.
pub struct Server<G: PrimeOrderGroup> {
    keys: KeyPair<G>,
    policy: RiskPolicy,
    replay: ReplayGuard,
    audit: Box<dyn AuditSink>,
}

impl<G: PrimeOrderGroup> Server<G> {
    pub fn new(keys: KeyPair<G>, policy: RiskPolicy) -> Self {
        Self {
            keys,
            policy,
            replay: ReplayGuard::new(DEFAULT_REPLAY_WINDOW),
            audit: Box::new(NullAudit),
        }
    }

    /// Fresh key pair. Counts as one asymmetric key generation.
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(policy: RiskPolicy, rng: &mut R) -> Self {
        Self::new(KeyPair::generate(rng), policy)
    }

    /// Operations spent by [`Server::generate`].
    pub fn setup_ops() -> OpCounts {
        OpCounts {
            asymmetric_keygens: 1,
            ..OpCounts::default()
        }
    }

    pub fn with_audit(mut self, sink: impl AuditSink + 'static) -> Self {
        self.audit = Box::new(sink);
        self
    }

    pub fn with_replay_guard(mut self, guard: ReplayGuard) -> Self {
        self.replay = guard;
        self
    }

    pub fn public_key(&self) -> &G::Element {
        self.keys.public()
    }

    pub fn keys(&self) -> &KeyPair<G> {
        &self.keys
    }

    pub fn policy(&self) -> &RiskPolicy {
        &self.policy
    }

    pub fn replay_guard(&self) -> &ReplayGuard {
        &self.replay
    }

    pub fn connect(self: &Arc<Self>) -> ServerConnection<G> {
        ServerConnection {
            server: Arc::clone(self),
            state: ConnState::Open,
            metrics: Metrics::default(),
        }
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for Server<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Server")
            .field("public", &hex::encode(G::encode(self.keys.public())))
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ConnState {
    Open,
    Issued([u8; 32]),
    Verified([u8; 32]),
    Closed,
}

/// One client connection. Feeds on frames, answers with frames.
pub struct ServerConnection<G: PrimeOrderGroup> {
    server: Arc<Server<G>>,
    state: ConnState,
    metrics: Metrics,
}

impl<G: PrimeOrderGroup> ServerConnection<G> {
    /// The unsolicited first frame of every connection.
    pub fn greeting(&self) -> Vec<u8> {
        wire::encode(&Message::ServerPubKey(G::encode(self.server.public_key())))
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    /// Returns the accumulated metrics and resets them.
    pub fn take_metrics(&mut self) -> Metrics {
        std::mem::take(&mut self.metrics)
    }

    pub fn is_closed(&self) -> bool {
        self.state == ConnState::Closed
    }

    pub fn handle(&mut self, frame: &[u8]) -> Vec<Vec<u8>> {
        let start = Instant::now();
        let reply = match wire::decode(frame) {
            Ok(msg) => self.dispatch(msg),
            Err(_) => {
                self.state = ConnState::Closed;
                Message::Status(Status::ProtocolError)
            }
        };
        self.metrics.compute += start.elapsed();
        vec![wire::encode(&reply)]
    }

    fn dispatch(&mut self, msg: Message) -> Message {
        let result = match (self.state, msg) {
            (ConnState::Open, Message::BlindedOprfInput(m)) => self.on_oprf(&m),
            (ConnState::Open, Message::SessionRequest(parts)) => self.on_session(&parts),
            (ConnState::Issued(h), Message::TokenPresentation(parts)) => self.on_token(h, &parts),
            (ConnState::Verified(sid), Message::PrivateFeatures { profile, live }) => {
                self.on_features(sid, &profile, &live)
            }
            _ => Err(Error::Protocol("unexpected message".into())),
        };
        match result {
            Ok(reply) => reply,
            Err(e) => {
                self.state = ConnState::Closed;
                Message::Status(match e {
                    Error::AuthenticationRejected => Status::AuthenticationRejected,
                    Error::ReplayRejected => Status::ReplayRejected,
                    Error::Protocol(_) => Status::ProtocolError,
                    _ => Status::Malformed,
                })
            }
        }
    }

    fn on_oprf(&mut self, m: &[u8; 32]) -> Result<Message> {
        let blinded = G::decode(m)?;
        let evaluated = oprf::evaluate::<G>(&blinded, self.server.keys.secret())?;
        self.metrics.ops.prf_evaluations += 1;
        Ok(Message::OprfEvaluation(G::encode(&evaluated)))
    }

    fn on_session(&mut self, parts: &[[u8; 32]; 3]) -> Result<Message> {
        let request = SessionRequest::<G> {
            blinded_eval: G::decode(&parts[0])?,
            blinded_hash: G::decode(&parts[1])?,
            blinded_session: G::decode(&parts[2])?,
        };
        self.metrics.ops.prf_evaluations += 1;
        let t_prime = token::issue(&request, self.server.keys.secret())?;
        self.state = ConnState::Issued(parts[1]);
        Ok(Message::BlindTokenReply(G::encode(&t_prime)))
    }

    fn on_token(&mut self, issued_hash: [u8; 32], parts: &[[u8; 32]; 3]) -> Result<Message> {
        let tok = SessionToken::<G> {
            token: G::decode(&parts[0])?,
            blinded_hash: G::decode(&parts[1])?,
            session_id: G::decode(&parts[2])?,
        };
        if self.server.replay.contains(&parts[2]) {
            return Err(Error::ReplayRejected);
        }
        self.metrics.ops.token_verifications += 1;
        if parts[1] != issued_hash || !token::verify(&tok, self.server.keys.secret()) {
            return Err(Error::AuthenticationRejected);
        }
        self.server.replay.check_and_insert(parts[2])?;
        self.state = ConnState::Verified(parts[2]);
        Ok(Message::Status(Status::Accepted))
    }

    fn on_features(
        &mut self,
        session_id: [u8; 32],
        profile: &[wire::Fixed256],
        live: &[wire::Fixed256],
    ) -> Result<Message> {
        let policy = &self.server.policy;
        if profile.len() != policy.n_features() {
            return Err(Error::LengthMismatch {
                expected: policy.n_features(),
                actual: profile.len(),
            });
        }
        let profile: Vec<f64> = profile.iter().map(wire::Fixed256::to_f64).collect();
        let live: Vec<f64> = live.iter().map(wire::Fixed256::to_f64).collect();
        self.metrics.ops.feature_aggregations += profile.len() as u64;
        let r = risk::score(&profile, &live, policy)?;
        self.metrics.ops.risk_computations += 1;
        let decision = risk::decide(r, policy);
        self.metrics.ops.decisions += 1;
        self.server
            .audit
            .record(&AuditEvent::now(session_id, r.value(), decision));
        self.state = ConnState::Closed;
        Ok(Message::risk_reply(r.value(), decision))
    }
}

impl<G: PrimeOrderGroup> fmt::Debug for ServerConnection<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ServerConnection")
            .field("state", &self.state)
            .finish_non_exhaustive()
    }
}

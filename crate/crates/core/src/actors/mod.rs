//! Client and server roles wired together over an abstract transport.
//!
//! A connection opens with the server pushing its public key. After that
//! the client drives: registration sends one blinded OPRF input;
//! authentication sends a session request, the unblinded token, and the
//! noised feature vectors, in that order. The server enforces the order
//! per connection and answers anything out of sequence with a protocol
//! error.

mod client;
mod server;
mod transport;

use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

pub use client::{AuthOutcome, Client, ClientPhase, ClientRecord, Registration};
pub use server::{Server, ServerConnection};
pub use transport::{Direction, LoopbackTransport, Transcript, Transport};

use crate::risk::AuthRequirement;

/// Per-role counts of the protocol's logical operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub symmetric_keygens: u64,
    pub asymmetric_keygens: u64,
    pub feature_extractions: u64,
    pub symmetric_encryptions: u64,
    pub symmetric_decryptions: u64,
    pub hashes: u64,
    pub prf_evaluations: u64,
    pub token_verifications: u64,
    pub noise_additions: u64,
    pub feature_aggregations: u64,
    pub risk_computations: u64,
    pub decisions: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.symmetric_keygens
            + self.asymmetric_keygens
            + self.feature_extractions
            + self.symmetric_encryptions
            + self.symmetric_decryptions
            + self.hashes
            + self.prf_evaluations
            + self.token_verifications
            + self.noise_additions
            + self.feature_aggregations
            + self.risk_computations
            + self.decisions
    }
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        self.symmetric_keygens += o.symmetric_keygens;
        self.asymmetric_keygens += o.asymmetric_keygens;
        self.feature_extractions += o.feature_extractions;
        self.symmetric_encryptions += o.symmetric_encryptions;
        self.symmetric_decryptions += o.symmetric_decryptions;
        self.hashes += o.hashes;
        self.prf_evaluations += o.prf_evaluations;
        self.token_verifications += o.token_verifications;
        self.noise_additions += o.noise_additions;
        self.feature_aggregations += o.feature_aggregations;
        self.risk_computations += o.risk_computations;
        self.decisions += o.decisions;
    }
}

/// Operation counts plus wall-clock compute time, excluding transport.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub ops: OpCounts,
    pub compute: Duration,
}

/// What the server logs per decision. Carries no identity material.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditEvent {
    pub timestamp_ms: u128,
    pub session_id: [u8; 32],
    pub score: f64,
    pub decision: AuthRequirement,
}

impl AuditEvent {
    pub(crate) fn now(session_id: [u8; 32], score: f64, decision: AuthRequirement) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis());
        Self {
            timestamp_ms,
            session_id,
            score,
            decision,
        }
    }
}

pub trait AuditSink: Send + Sync {
    fn record(&self, event: &AuditEvent);
}

/// Discards events.
#[derive(Debug, Default)]
pub struct NullAudit;

impl AuditSink for NullAudit {
    fn record(&self, _: &AuditEvent) {}
}

/// Keeps events in memory.
#[derive(Debug, Default)]
pub struct MemoryAudit {
    events: Mutex<Vec<AuditEvent>>,
}

impl MemoryAudit {
    pub fn events(&self) -> Vec<AuditEvent> {
        self.events.lock().expect("audit poisoned").clone()
    }
}

impl AuditSink for MemoryAudit {
    fn record(&self, event: &AuditEvent) {
        self.events
            .lock()
            .expect("audit poisoned")
            .push(event.clone());
    }
}

impl<T: AuditSink + ?Sized> AuditSink for std::sync::Arc<T> {
    fn record(&self, event: &AuditEvent) {
        (**self).record(event)
    }
}

//! Privacy-preserving risk-based adaptive authentication.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: prime-order group abstraction (ristretto255, plus a tiny
//!   enumerable group for exhaustive tests);
//! * [`oprf`]: blinded OPRF over the credential digest `H(U ∥ P)`;
//! * [`token`]: unlinkable per-session tokens derived from the OPRF output;
//! * [`privacy`]: Laplace-mechanism noise on feature vectors;
//! * [`risk`]: weighted-deviation risk score and the Standard / StepUp /
//!   Advanced decision;
//! * [`vault`]: encrypted profile backup in a content-addressed store with a
//!   signed, rollback-protected recovery registry;
//! * [`wire`]: the byte-exact message codec;
//! * [`actors`]: client and server state machines over an abstract transport;
//! * [`simnet`]: simulated lossy network and the benchmark harness.

pub mod actors;
pub mod error;
pub mod group;
pub mod oprf;
pub mod privacy;
pub mod risk;
pub mod simnet;
pub mod token;
pub mod vault;
pub mod wire;

pub use error::{Error, Result};
pub use group::{PrimeOrderGroup, Ristretto255};
pub use privacy::{Bounds, FeatureVector, PrivacyBudget};
pub use risk::{AuthRequirement, RiskPolicy, RiskScore};

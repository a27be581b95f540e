use std::io;

use thiserror::Error;

/// Errors produced anywhere in the protocol stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group element encoding is not canonical")]
    Decode,
    #[error("scalar encoding is not canonical")]
    ScalarDecode,
    #[error("username and password must be nonempty")]
    EmptyCredential,
    #[error("malformed input: {0}")]
    Malformed(&'static str),
    #[error("authentication rejected")]
    AuthenticationRejected,
    #[error("session identifier already used")]
    ReplayRejected,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("feature count mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("authenticated decryption failed")]
    DecryptionFailed,
    #[error("not found")]
    NotFound,
    #[error("registry entry signature does not verify")]
    BadSignature,
    #[error("stale registry counter {got} (latest is {latest})")]
    StaleCounter { got: u64, latest: u64 },
    #[error("framing error: {0}")]
    Framing(&'static str),
    #[error("value does not fit the 256-bit fixed-point feature encoding")]
    Overflow,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

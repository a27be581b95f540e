//! Simulated lossy network and the benchmark sweep built on it.
//!
//! Time is simulated. A payload is cut into chunks of
//! `max(1, ⌊base_chunk · congestion⌋)` bytes sent stop-and-wait. Each
//! attempt draws a one-way delay from `U[lo, hi] / congestion` and is lost
//! with probability `min(0.95, base_loss / congestion)`. A lost attempt
//! costs a timeout of twice the running mean delay and is retried until it
//! gets through.

mod bench;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use bench::{
    export_csv, parse_csv, run_benchmark, run_benchmark_with, run_trial, write_csv, BenchOptions,
    BenchRow, CostModel, Phase, PhaseMeasurement, Side, TrialMeasurement, DEFAULT_FEATURE_COUNTS,
    DEFAULT_TRIALS,
};

use crate::actors::{LoopbackTransport, Server, ServerConnection, Transcript, Transport};
use crate::error::{Error, Result};
use crate::group::PrimeOrderGroup;

/// Link parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetConfig {
    /// One-way delay bounds in milliseconds before congestion scaling.
    pub delay_ms: (f64, f64),
    /// 0.5 is heavily congested, 2.0 is lightly loaded.
    pub congestion: f64,
    pub base_loss: f64,
    pub base_chunk: usize,
    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            delay_ms: (10.0, 100.0),
            congestion: 1.0,
            base_loss: 0.1,
            base_chunk: 1024,
            seed: 0,
        }
    }
}

impl NetConfig {
    pub const MIN_CONGESTION: f64 = 0.5;
    pub const MAX_CONGESTION: f64 = 2.0;
    pub const MAX_LOSS: f64 = 0.95;

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.delay_ms;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "delay interval [{lo}, {hi}]"
            )));
        }
        if !(Self::MIN_CONGESTION..=Self::MAX_CONGESTION).contains(&self.congestion) {
            return Err(Error::InvalidParameter(format!(
                "congestion {} outside [{}, {}]",
                self.congestion,
                Self::MIN_CONGESTION,
                Self::MAX_CONGESTION
            )));
        }
        if !(0.0..1.0).contains(&self.base_loss) {
            return Err(Error::InvalidParameter(format!(
                "base loss {} outside [0, 1)",
                self.base_loss
            )));
        }
        if self.base_chunk == 0 {
            return Err(Error::InvalidParameter(
                "base chunk must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn chunk_size(&self) -> usize {
        ((self.base_chunk as f64 * self.congestion).floor() as usize).max(1)
    }

    pub fn loss_probability(&self) -> f64 {
        (self.base_loss / self.congestion).min(Self::MAX_LOSS)
    }

    fn mean_delay(&self) -> f64 {
        (self.delay_ms.0 + self.delay_ms.1) / 2.0 / self.congestion
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TransmissionReport {
    pub elapsed_ms: f64,
    pub retransmissions: u64,
    pub chunks: u64,
    /// Payload bytes delivered; retransmitted copies are not counted.
    pub bytes_sent: u64,
}

impl std::ops::AddAssign for TransmissionReport {
    fn add_assign(&mut self, o: Self) {
        self.elapsed_ms += o.elapsed_ms;
        self.retransmissions += o.retransmissions;
        self.chunks += o.chunks;
        self.bytes_sent += o.bytes_sent;
    }
}

/// Running mean of every delay drawn on a link.
#[derive(Clone, Copy, Debug)]
struct DelayTracker {
    sum: f64,
    n: u64,
    prior: f64,
}

impl DelayTracker {
    fn new(cfg: &NetConfig) -> Self {
        Self {
            sum: 0.0,
            n: 0,
            prior: cfg.mean_delay(),
        }
    }

    fn observe(&mut self, d: f64) {
        self.sum += d;
        self.n += 1;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            self.prior
        } else {
            self.sum / self.n as f64
        }
    }
}

fn transmit_tracked<R: Rng + ?Sized>(
    payload: &[u8],
    cfg: &NetConfig,
    tracker: &mut DelayTracker,
    rng: &mut R,
) -> TransmissionReport {
    let (lo, hi) = cfg.delay_ms;
    let loss = cfg.loss_probability();
    let mut report = TransmissionReport {
        bytes_sent: payload.len() as u64,
        ..Default::default()
    };
    for _ in payload.chunks(cfg.chunk_size()) {
        report.chunks += 1;
        loop {
            let delay = (lo + (hi - lo) * rng.gen::<f64>()) / cfg.congestion;
            tracker.observe(delay);
            if rng.gen::<f64>() < loss {
                report.retransmissions += 1;
                report.elapsed_ms += 2.0 * tracker.mean();
            } else {
                report.elapsed_ms += delay;
                break;
            }
        }
    }
    report
}

/// Simulates sending one payload over a fresh link.
///
/// # Panics
/// If `payload` is empty or `cfg` is invalid.
pub fn transmit<R: Rng + ?Sized>(
    payload: &[u8],
    cfg: &NetConfig,
    rng: &mut R,
) -> TransmissionReport {
    assert!(!payload.is_empty(), "payload must be nonempty");
    cfg.validate().expect("invalid network config");
    transmit_tracked(payload, cfg, &mut DelayTracker::new(cfg), rng)
}

/// Loopback transport whose frames also pass through the simulated link.
/// Delivery is eventually guaranteed, so the protocol sees the same bytes
/// as over a lossless link; only the accumulated report differs.
pub struct SimTransport<G: PrimeOrderGroup> {
    inner: LoopbackTransport<G>,
    cfg: NetConfig,
    rng: ChaCha20Rng,
    tracker: DelayTracker,
    report: TransmissionReport,
}

impl<G: PrimeOrderGroup> SimTransport<G> {
    /// Link randomness is seeded from `cfg.seed`.
    pub fn connect(server: &Arc<Server<G>>, cfg: NetConfig) -> Result<Self> {
        Self::connect_with_rng(server, cfg, ChaCha20Rng::seed_from_u64(cfg.seed))
    }

    pub fn connect_with_rng(
        server: &Arc<Server<G>>,
        cfg: NetConfig,
        rng: ChaCha20Rng,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            inner: LoopbackTransport::connect(server),
            cfg,
            rng,
            tracker: DelayTracker::new(&cfg),
            report: TransmissionReport::default(),
        })
    }

    pub fn report(&self) -> TransmissionReport {
        self.report
    }

    pub fn transcript(&self) -> &Transcript {
        self.inner.transcript()
    }

    pub fn connection(&self) -> &ServerConnection<G> {
        self.inner.connection()
    }

    fn carry(&mut self, frame: &[u8]) {
        let r = transmit_tracked(frame, &self.cfg, &mut self.tracker, &mut self.rng);
        self.report += r;
    }
}

impl<G: PrimeOrderGroup> Transport for SimTransport<G> {
    fn send(&mut self, frame: &[u8]) -> Result<()> {
        if frame.is_empty() {
            return Err(Error::Transport("empty frame".into()));
        }
        self.carry(frame);
        self.inner.send(frame)
    }

    fn receive(&mut self) -> Result<Vec<u8>> {
        let frame = self.inner.receive()?;
        self.carry(&frame);
        Ok(frame)
    }
}

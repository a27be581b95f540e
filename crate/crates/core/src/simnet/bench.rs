use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{NetConfig, SimTransport, TransmissionReport};
use crate::actors::{Client, Metrics, OpCounts, Server};
use crate::error::{Error, Result};
use crate::group::Ristretto255;
use crate::privacy::{Bounds, FeatureVector, PrivacyBudget, DEFAULT_EPSILON};
use crate::risk::{AuthRequirement, RiskPolicy};
use crate::vault::{MemoryStore, Registry};

pub const DEFAULT_FEATURE_COUNTS: [usize; 7] = [1, 5, 10, 15, 20, 25, 30];
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Setup,
    Auth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Client,
    Server,
    Comm,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Setup => "setup",
            Phase::Auth => "auth",
        })
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Client => "client",
            Side::Server => "server",
            Side::Comm => "comm",
        })
    }
}

/// One averaged cell of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_f: usize,
    pub phase: Phase,
    pub side: Side,
    pub metric: String,
    pub mean: f64,
    pub trials: usize,
}

/// Nominal per-operation cost in microseconds, used to turn operation
/// counts into a hardware-independent compute time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub symmetric_keygen: f64,
    pub asymmetric_keygen: f64,
    pub feature_extraction: f64,
    pub symmetric_encryption: f64,
    pub symmetric_decryption: f64,
    pub hash: f64,
    pub prf_evaluation: f64,
    pub token_verification: f64,
    pub noise_addition: f64,
    pub feature_aggregation: f64,
    pub risk_computation: f64,
    pub decision: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            symmetric_keygen: 1.0,
            asymmetric_keygen: 40.0,
            feature_extraction: 0.5,
            symmetric_encryption: 2.0,
            symmetric_decryption: 2.0,
            hash: 15.0,
            prf_evaluation: 80.0,
            token_verification: 80.0,
            noise_addition: 0.05,
            feature_aggregation: 0.01,
            risk_computation: 0.1,
            decision: 0.01,
        }
    }
}

impl CostModel {
    pub fn millis(&self, ops: &OpCounts) -> f64 {
        let us = self.symmetric_keygen * ops.symmetric_keygens as f64
            + self.asymmetric_keygen * ops.asymmetric_keygens as f64
            + self.feature_extraction * ops.feature_extractions as f64
            + self.symmetric_encryption * ops.symmetric_encryptions as f64
            + self.symmetric_decryption * ops.symmetric_decryptions as f64
            + self.hash * ops.hashes as f64
            + self.prf_evaluation * ops.prf_evaluations as f64
            + self.token_verification * ops.token_verifications as f64
            + self.noise_addition * ops.noise_additions as f64
            + self.feature_aggregation * ops.feature_aggregations as f64
            + self.risk_computation * ops.risk_computations as f64
            + self.decision * ops.decisions as f64;
        us / 1000.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseMeasurement {
    pub client: Metrics,
    pub server: Metrics,
    pub link: TransmissionReport,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialMeasurement {
    pub n_f: usize,
    pub setup: PhaseMeasurement,
    pub auth: PhaseMeasurement,
    pub decision: AuthRequirement,
}

fn trial_seed(base: u64, n_f: usize, trial: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"privrba-v1-bench-trial");
    h.update(base.to_be_bytes());
    h.update((n_f as u64).to_be_bytes());
    h.update((trial as u64).to_be_bytes());
    h.finalize().into()
}

/// One synthetic user: setup then a single authentication, both over `cfg`.
pub fn run_trial(n_f: usize, cfg: &NetConfig, seed: [u8; 32]) -> Result<TrialMeasurement> {
    if n_f == 0 {
        return Err(Error::InvalidParameter(
            "feature count must be positive".into(),
        ));
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let bounds = vec![Bounds::new(0.0, 1.0)?; n_f];
    let policy = RiskPolicy::with_defaults(bounds.clone())?;
    let budget = PrivacyBudget::for_policy(DEFAULT_EPSILON, &policy)?;

    let start = Instant::now();
    let server = Server::<Ristretto255>::generate(policy, &mut rng);
    let server_setup = Metrics {
        ops: Server::<Ristretto255>::setup_ops(),
        compute: start.elapsed(),
    };
    let server = Arc::new(server);
    let mut client =
        Client::<Ristretto255>::new(ChaCha20Rng::from_rng(&mut rng).expect("chacha reseed"));

    let username = format!("user-{:016x}", rng.gen::<u64>());
    let password = format!("pw-{:016x}", rng.gen::<u64>());
    let profile: Vec<f64> = (0..n_f).map(|_| rng.gen::<f64>()).collect();
    let live: Vec<f64> = profile
        .iter()
        .map(|p| (p + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0))
        .collect();
    let profile = FeatureVector::new(profile, bounds)?;

    let store = MemoryStore::default();
    let registry = Registry::in_memory();

    let net = ChaCha20Rng::from_rng(&mut rng).expect("chacha reseed");
    let mut link = SimTransport::connect_with_rng(&server, *cfg, net)?;
    client.register(&username, &password, &profile, &mut link, &store, &registry)?;
    let mut setup_server = link.connection().metrics();
    setup_server.ops += server_setup.ops;
    setup_server.compute += server_setup.compute;
    let setup = PhaseMeasurement {
        client: client.take_metrics(),
        server: setup_server,
        link: link.report(),
    };

    let net = ChaCha20Rng::from_rng(&mut rng).expect("chacha reseed");
    let mut link = SimTransport::connect_with_rng(&server, *cfg, net)?;
    let outcome = client.authenticate(&username, &password, &live, &budget, &mut link)?;
    let auth = PhaseMeasurement {
        client: client.take_metrics(),
        server: link.connection().metrics(),
        link: link.report(),
    };
    Ok(TrialMeasurement {
        n_f,
        setup,
        auth,
        decision: outcome.requirement,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BenchOptions {
    pub cost: CostModel,
    /// Adds `compute_wall_ms` rows. These vary run to run.
    pub wall_clock: bool,
}

/// The sweep with default options: deterministic for a fixed `cfg.seed`.
pub fn run_benchmark(
    feature_counts: &[usize],
    cfg: &NetConfig,
    trials: usize,
) -> Result<Vec<BenchRow>> {
    run_benchmark_with(feature_counts, cfg, trials, &BenchOptions::default())
}

/// Runs `trials` setup+auth flows per feature count and averages them.
///
/// Per `(n_f, phase)` the rows are, in order: client and server `ops` and
/// `compute_model_ms` (plus `compute_wall_ms` if requested), then comm
/// `comm_ms`, `retransmissions` per chunk, and `bytes`.
pub fn run_benchmark_with(
    feature_counts: &[usize],
    cfg: &NetConfig,
    trials: usize,
    opts: &BenchOptions,
) -> Result<Vec<BenchRow>> {
    if feature_counts.is_empty() {
        return Err(Error::InvalidParameter("no feature counts given".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "trial count must be positive".into(),
        ));
    }
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n_f in feature_counts {
        let runs = (0..trials)
            .map(|t| run_trial(n_f, cfg, trial_seed(cfg.seed, n_f, t)))
            .collect::<Result<Vec<_>>>()?;
        for phase in [Phase::Setup, Phase::Auth] {
            let pick = |m: &TrialMeasurement| match phase {
                Phase::Setup => m.setup,
                Phase::Auth => m.auth,
            };
            let mean = |f: &dyn Fn(&PhaseMeasurement) -> f64| {
                runs.iter().map(|m| f(&pick(m))).sum::<f64>() / trials as f64
            };
            let mut push = |side: Side, metric: &str, value: f64| {
                rows.push(BenchRow {
                    n_f,
                    phase,
                    side,
                    metric: metric.to_owned(),
                    mean: value,
                    trials,
                });
            };
            for side in [Side::Client, Side::Server] {
                let of = move |p: &PhaseMeasurement| {
                    if side == Side::Client {
                        p.client
                    } else {
                        p.server
                    }
                };
                push(side, "ops", mean(&|p| of(p).ops.total() as f64));
                push(
                    side,
                    "compute_model_ms",
                    mean(&|p| opts.cost.millis(&of(p).ops)),
                );
                if opts.wall_clock {
                    push(
                        side,
                        "compute_wall_ms",
                        mean(&|p| of(p).compute.as_secs_f64() * 1e3),
                    );
                }
            }
            push(Side::Comm, "comm_ms", mean(&|p| p.link.elapsed_ms));
            push(
                Side::Comm,
                "retransmissions",
                mean(&|p| p.link.retransmissions as f64 / p.link.chunks as f64),
            );
            push(Side::Comm, "bytes", mean(&|p| p.link.bytes_sent as f64));
        }
    }
    Ok(rows)
}

/// Writes the header and one record per row.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(["n_f", "phase", "side", "metric", "mean", "trials"])
        .map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Protocol(format!("csv: {other:?}")),
    }
}

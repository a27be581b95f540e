use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use privrba_core::actors::{Client, LoopbackTransport};
use privrba_core::group::{KeyPair, PrimeOrderGroup};
use privrba_core::risk::{DEFAULT_HIGH_THRESHOLD, DEFAULT_LOW_THRESHOLD};
use privrba_core::simnet::{run_benchmark_with, write_csv, BenchOptions, NetConfig};
use privrba_core::{AuthRequirement, Bounds, Error, PrivacyBudget, RiskPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

mod data;
mod features;

use data::{DataDir, G};

/// Privacy-preserving risk-based authentication.
#[derive(Parser)]
#[command(name = "privrba", version)]
struct Cli {
    /// Data directory holding server keys, client records and the profile store.
    #[arg(
        long,
        global = true,
        env = "PRIVRBA_DIR",
        default_value = "privrba-data"
    )]
    dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the server key pair and decision thresholds.
    Setup {
        /// Replace existing keys. Clients registered under the old key must register again.
        #[arg(long)]
        force: bool,
        /// Derive the key from a seed instead of OS entropy.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_LOW_THRESHOLD)]
        low: f64,
        #[arg(long, default_value_t = DEFAULT_HIGH_THRESHOLD)]
        high: f64,
    },
    /// Register a user (or re-register with a new profile) and back up the profile.
    Register {
        #[arg(long)]
        user: String,
        #[arg(long, env = "PRIVRBA_PASSWORD", hide_env_values = true)]
        pass: String,
        /// Feature file with the enrolment profile.
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one authentication session against the stored profile.
    Auth {
        #[arg(long)]
        user: String,
        #[arg(long, env = "PRIVRBA_PASSWORD", hide_env_values = true)]
        pass: String,
        /// Feature file with the live observation.
        #[arg(long)]
        live: PathBuf,
        #[arg(long, default_value_t = privrba_core::privacy::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Publish the current encrypted profile again under the next counter.
    Backup {
        #[arg(long)]
        user: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fetch and decrypt the latest profile of an owner.
    Recover {
        /// Owner public key, hex.
        #[arg(long)]
        owner: String,
        /// File holding the hex symmetric key.
        #[arg(long)]
        key: PathBuf,
        /// Write the feature file here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulated-network benchmark; prints CSV.
    Bench {
        /// Comma-separated feature counts.
        #[arg(long, value_delimiter = ',', default_values_t = privrba_core::simnet::DEFAULT_FEATURE_COUNTS.to_vec())]
        features: Vec<usize>,
        #[arg(long, default_value_t = privrba_core::simnet::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        congestion: f64,
        #[arg(long, default_value_t = 0.1)]
        loss: f64,
        #[arg(long, default_value_t = 1024)]
        chunk: usize,
        /// Include measured wall-clock compute rows (not reproducible).
        #[arg(long)]
        wall_clock: bool,
    },
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Self { code: 1, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::AuthenticationRejected => 2,
            Error::NotFound => 3,
            Error::DecryptionFailed => 4,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn read_features(path: &PathBuf) -> Result<privrba_core::FeatureVector, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(features::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let dir = DataDir::new(cli.dir);
    match cli.command {
        Command::Setup {
            force,
            seed,
            low,
            high,
        } => {
            if dir.has_server() && !force {
                return Err("server keys already exist; pass --force to replace them"
                    .to_string()
                    .into());
            }
            // Checks the thresholds before anything is written.
            RiskPolicy::uniform(vec![Bounds::new(0.0, 1.0)?], low, high)?;
            let keys = KeyPair::<G>::generate(&mut rng(seed));
            dir.init_server(&keys, low, high)?;
            println!(
                "server public key: {}",
                hex::encode(G::encode(keys.public()))
            );
            Ok(0)
        }
        Command::Register {
            user,
            pass,
            features: path,
            seed,
        } => {
            let profile = read_features(&path)?;
            let (low, high) = dir.thresholds()?;
            let policy = match dir.policy()? {
                Some(p) => p,
                None => {
                    let p = RiskPolicy::uniform(profile.bounds().to_vec(), low, high)?;
                    dir.save_policy(&p)?;
                    p
                }
            };
            if policy.n_features() != profile.len() {
                return Err(Error::LengthMismatch {
                    expected: policy.n_features(),
                    actual: profile.len(),
                }
                .into());
            }
            let server = dir.server(policy)?;
            let mut client = match dir.load_client(&user)? {
                Some(record) => Client::from_record(record, rng(seed)),
                None => Client::new(rng(seed)),
            };
            let mut link = LoopbackTransport::connect(&server);
            let reg = client.register(
                &user,
                &pass,
                &profile,
                &mut link,
                &dir.store()?,
                &dir.registry()?,
            )?;
            let record = client
                .record()
                .ok_or("registration left no client record".to_string())?;
            dir.save_client(&user, &record)?;
            println!("owner: {}", hex::encode(G::encode(client.owner())));
            println!("cid: {}", reg.cid.to_hex());
            println!("counter: {}", reg.entry.counter);
            println!("key file: {}", dir.key_file(&user).display());
            Ok(0)
        }
        Command::Auth {
            user,
            pass,
            live: path,
            epsilon,
            seed,
        } => {
            let live = read_features(&path)?;
            let policy = dir
                .policy()?
                .ok_or("no policy yet; register a user first".to_string())?;
            let budget = PrivacyBudget::for_policy(epsilon, &policy)?;
            let record = dir
                .load_client(&user)?
                .ok_or(format!("user {user:?} is not registered"))?;
            let server = dir.server(policy)?;
            let mut client = Client::<G>::from_record(record, rng(seed));
            let mut link = LoopbackTransport::connect(&server);
            let outcome = client.authenticate(&user, &pass, live.values(), &budget, &mut link)?;
            dir.record_session(&outcome.session_id)?;
            println!("risk score: {:.4}", outcome.score.value());
            println!("decision: {:?}", outcome.requirement);
            Ok(match outcome.requirement {
                AuthRequirement::Standard => 0,
                AuthRequirement::StepUp => 10,
                AuthRequirement::Advanced => 11,
            })
        }
        Command::Backup { user, seed } => {
            let record = dir
                .load_client(&user)?
                .ok_or(format!("user {user:?} is not registered"))?;
            let mut client = Client::<G>::from_record(record, rng(seed));
            let reg = client.backup(&dir.store()?, &dir.registry()?)?;
            println!("cid: {}", reg.cid.to_hex());
            println!("counter: {}", reg.entry.counter);
            Ok(0)
        }
        Command::Recover { owner, key, out } => {
            let owner = data::parse_owner(&owner)?;
            let key = data::read_key_file(&key)?;
            let profile =
                privrba_core::vault::recover(&dir.registry()?, &dir.store()?, &owner, &key)?;
            let text = features::format(&profile);
            match out {
                Some(path) => {
                    fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Bench {
            features,
            trials,
            seed,
            out,
            congestion,
            loss,
            chunk,
            wall_clock,
        } => {
            let cfg = NetConfig {
                congestion,
                base_loss: loss,
                base_chunk: chunk,
                seed,
                ..NetConfig::default()
            };
            cfg.validate()?;
            let opts = BenchOptions {
                wall_clock,
                ..BenchOptions::default()
            };
            let rows = run_benchmark_with(&features, &cfg, trials, &opts)?;
            match out {
                Some(path) => privrba_core::simnet::export_csv(&rows, &path)?,
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    write_csv(&rows, &mut lock)?;
                    lock.flush().map_err(Error::from)?;
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("privrba: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

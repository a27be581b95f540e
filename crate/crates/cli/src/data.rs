//! On-disk layout of a data directory.
//!
//! ```text
//! server/secret.key      hex scalar, owner-only permissions
//! server/public.key      hex element
//! server/thresholds.json decision thresholds chosen at setup
//! server/policy.json     risk policy, fixed by the first registration
//! server/replay.log      spent session ids, one hex id per line
//! store/<cid>            encrypted profiles
//! registry.journal       signed owner → cid entries
//! clients/<tag>/record   client state; <tag> is a hash of the username
//! clients/<tag>/sym.key  hex S_u, needed for recovery on a new device
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use privrba_core::actors::{ClientRecord, Server};
use privrba_core::group::{KeyPair, PrimeOrderGroup};
use privrba_core::risk::RiskPolicy;
use privrba_core::token::{ReplayGuard, DEFAULT_REPLAY_WINDOW};
use privrba_core::vault::{DirStore, Registry, SymmetricKey};
use privrba_core::Ristretto255;
use sha2::{Digest, Sha256};

pub type G = Ristretto255;

pub struct DataDir {
    root: PathBuf,
}

fn read_hex32(path: &Path) -> Result<[u8; 32], String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = [0u8; 32];
    hex::decode_to_slice(text.trim(), &mut out)
        .map_err(|_| format!("{}: not 64 hex digits", path.display()))?;
    Ok(out)
}

fn write_private(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    opts.open(path)?.write_all(contents)
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn server_dir(&self) -> PathBuf {
        self.root.join("server")
    }

    fn secret_path(&self) -> PathBuf {
        self.server_dir().join("secret.key")
    }

    fn policy_path(&self) -> PathBuf {
        self.server_dir().join("policy.json")
    }

    fn replay_path(&self) -> PathBuf {
        self.server_dir().join("replay.log")
    }

    pub fn has_server(&self) -> bool {
        self.secret_path().is_file()
    }

    /// Writes a fresh server key pair and thresholds, clearing spent sessions.
    pub fn init_server(&self, keys: &KeyPair<G>, low: f64, high: f64) -> Result<(), String> {
        let dir = self.server_dir();
        fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        write_private(
            &self.secret_path(),
            hex::encode(G::encode_scalar(keys.secret())).as_bytes(),
        )
        .map_err(|e| e.to_string())?;
        fs::write(
            dir.join("public.key"),
            hex::encode(G::encode(keys.public())) + "\n",
        )
        .map_err(|e| e.to_string())?;
        let thresholds = serde_json::json!({ "low": low, "high": high });
        fs::write(dir.join("thresholds.json"), thresholds.to_string())
            .map_err(|e| e.to_string())?;
        let _ = fs::remove_file(self.replay_path());
        fs::create_dir_all(self.root.join("store")).map_err(|e| e.to_string())?;
        Registry::<G>::open(self.registry_path()).map_err(|e| e.to_string())?;
        Ok(())
    }

    fn load_keys(&self) -> Result<KeyPair<G>, String> {
        if !self.has_server() {
            return Err(format!(
                "no server keys in {}; run `privrba setup` first",
                self.root.display()
            ));
        }
        let secret =
            G::decode_scalar(&read_hex32(&self.secret_path())?).map_err(|e| e.to_string())?;
        Ok(KeyPair::from_secret(secret))
    }

    pub fn thresholds(&self) -> Result<(f64, f64), String> {
        let path = self.server_dir().join("thresholds.json");
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        match (v["low"].as_f64(), v["high"].as_f64()) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(format!("{}: missing thresholds", path.display())),
        }
    }

    pub fn policy(&self) -> Result<Option<RiskPolicy>, String> {
        let path = self.policy_path();
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let p: RiskPolicy =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let (lo, hi) = p.thresholds();
        // Round-trip through the validating constructor.
        RiskPolicy::new(p.weights().to_vec(), p.bounds().to_vec(), lo, hi)
            .map(Some)
            .map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn save_policy(&self, p: &RiskPolicy) -> Result<(), String> {
        let text = serde_json::to_string_pretty(p).map_err(|e| e.to_string())?;
        fs::write(self.policy_path(), text).map_err(|e| e.to_string())
    }

    /// Server with its key, the given policy, and the persisted replay window.
    pub fn server(&self, policy: RiskPolicy) -> Result<Arc<Server<G>>, String> {
        let keys = self.load_keys()?;
        let guard = ReplayGuard::new(DEFAULT_REPLAY_WINDOW);
        if let Ok(text) = fs::read_to_string(self.replay_path()) {
            let lines: Vec<&str> = text.lines().collect();
            for line in &lines[lines.len().saturating_sub(DEFAULT_REPLAY_WINDOW)..] {
                let mut id = [0u8; 32];
                if hex::decode_to_slice(line.trim(), &mut id).is_ok() {
                    let _ = guard.check_and_insert(id);
                }
            }
        }
        Ok(Arc::new(Server::new(keys, policy).with_replay_guard(guard)))
    }

    pub fn record_session(&self, session_id: &[u8; 32]) -> Result<(), String> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.replay_path())
            .map_err(|e| e.to_string())?;
        writeln!(f, "{}", hex::encode(session_id)).map_err(|e| e.to_string())
    }

    pub fn store(&self) -> Result<DirStore, String> {
        DirStore::open(self.root.join("store")).map_err(|e| e.to_string())
    }

    fn registry_path(&self) -> PathBuf {
        self.root.join("registry.journal")
    }

    pub fn registry(&self) -> Result<Registry<G>, String> {
        Registry::open(self.registry_path()).map_err(|e| e.to_string())
    }

    fn client_dir(&self, username: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(b"privrba-cli-user");
        h.update(username.as_bytes());
        self.root
            .join("clients")
            .join(hex::encode(&h.finalize()[..16]))
    }

    pub fn key_file(&self, username: &str) -> PathBuf {
        self.client_dir(username).join("sym.key")
    }

    pub fn load_client(&self, username: &str) -> Result<Option<ClientRecord<G>>, String> {
        let path = self.client_dir(username).join("record");
        match fs::read(&path) {
            Ok(bytes) => ClientRecord::from_bytes(&bytes)
                .map(Some)
                .map_err(|e| format!("{}: {e}", path.display())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(format!("{}: {e}", path.display())),
        }
    }

    pub fn save_client(&self, username: &str, record: &ClientRecord<G>) -> Result<(), String> {
        let dir = self.client_dir(username);
        fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        write_private(&dir.join("record"), &record.to_bytes()).map_err(|e| e.to_string())?;
        write_private(
            &self.key_file(username),
            hex::encode(record.sym_key.to_bytes()).as_bytes(),
        )
        .map_err(|e| e.to_string())
    }
}

pub fn read_key_file(path: &Path) -> Result<SymmetricKey, String> {
    read_hex32(path).map(SymmetricKey::from_bytes)
}

pub fn parse_owner(hex_owner: &str) -> Result<<G as PrimeOrderGroup>::Element, String> {
    let mut bytes = [0u8; 32];
    hex::decode_to_slice(hex_owner.trim(), &mut bytes)
        .map_err(|_| "owner must be 64 hex digits".to_string())?;
    G::decode(&bytes).map_err(|e| e.to_string())
}

//! Fixtures shared by the criterion benches.

use std::sync::Arc;

use privrba_core::actors::{Client, LoopbackTransport, Server};
use privrba_core::vault::{MemoryStore, Registry};
use privrba_core::{Bounds, FeatureVector, PrivacyBudget, RiskPolicy, Ristretto255};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type G = Ristretto255;

pub const USER: &str = "bench-user";
pub const PASS: &str = "bench-pass";

/// A server and a client registered with an `n_f`-feature profile.
pub struct Fixture {
    pub server: Arc<Server<G>>,
    pub client: Client<G>,
    pub profile: FeatureVector,
    pub budget: PrivacyBudget,
}

impl Fixture {
    pub fn new(n_f: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let unit = Bounds::new(0.0, 1.0).expect("unit interval");
        let values = (0..n_f).map(|_| rng.gen::<f64>()).collect();
        let profile = FeatureVector::with_uniform_bounds(values, unit).expect("profile");
        let policy = RiskPolicy::with_defaults(vec![unit; n_f]).expect("policy");
        let budget = PrivacyBudget::for_policy(1.0, &policy).expect("budget");
        let server = Arc::new(Server::generate(policy, &mut rng));
        let mut client = Client::new(ChaCha20Rng::seed_from_u64(seed ^ 1));
        let mut link = LoopbackTransport::connect(&server);
        client
            .register(
                USER,
                PASS,
                &profile,
                &mut link,
                &MemoryStore::default(),
                &Registry::in_memory(),
            )
            .expect("registration");
        Self {
            server,
            client,
            profile,
            budget,
        }
    }

    /// One full authentication session with the profile as the live vector.
    pub fn authenticate(&mut self) {
        let mut link = LoopbackTransport::connect(&self.server);
        self.client
            .authenticate(USER, PASS, self.profile.values(), &self.budget, &mut link)
            .expect("authentication");
    }
}

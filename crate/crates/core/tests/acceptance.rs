//! Acceptance suite. One line per criterion; exits nonzero if any fails.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use privrba_core::actors::{Client, Direction, LoopbackTransport, OpCounts, Server, Transcript};
use privrba_core::group::{KeyPair, PrimeOrderGroup, Ristretto255, Toy179, Toy23};
use privrba_core::oprf::{self, CredentialDigest};
use privrba_core::privacy::{laplace_sample, privatize};
use privrba_core::risk::RiskPolicy;
use privrba_core::simnet::{
    self, run_benchmark, run_benchmark_with, run_trial, write_csv, BenchOptions, BenchRow,
    NetConfig, Phase, Side, SimTransport, DEFAULT_FEATURE_COUNTS, DEFAULT_TRIALS,
};
use privrba_core::token::{self, SessionToken};
use privrba_core::vault::{self, ContentStore, DirStore, Registry, SymmetricKey};
use privrba_core::wire::{self, Message, MessageKind, Status, HEADER_LEN};
use privrba_core::{Bounds, Error, FeatureVector, PrivacyBudget};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type G = Ristretto255;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit_bounds(n: usize) -> Vec<Bounds> {
    vec![Bounds::new(0.0, 1.0).unwrap(); n]
}

fn random_string<R: Rng>(rng: &mut R, prefix: &str) -> String {
    let len = rng.gen_range(1..24);
    let tail: String = (0..len)
        .map(|_| rng.gen_range(b'!'..=b'~') as char)
        .collect();
    format!("{prefix}{tail}")
}

fn c1_protocol_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(0xA1);
    let mut failures = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=30);
        let policy = RiskPolicy::with_defaults(unit_bounds(n)).unwrap();
        let server = Arc::new(Server::<G>::generate(policy, &mut rng));
        let mut client = Client::<G>::new(ChaCha20Rng::from_rng(&mut rng).unwrap());
        let user = random_string(&mut rng, "u");
        let pass = random_string(&mut rng, "p");
        let profile: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let live: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let eps = rng.gen_range(0.1..10.0);
        let store = vault::MemoryStore::default();
        let registry = Registry::in_memory();
        let ok = (|| -> privrba_core::Result<()> {
            let mut link = LoopbackTransport::connect(&server);
            client.register(
                &user,
                &pass,
                &FeatureVector::new(profile, unit_bounds(n))?,
                &mut link,
                &store,
                &registry,
            )?;
            let budget = PrivacyBudget::for_policy(eps, server.policy())?;
            let mut link = LoopbackTransport::connect(&server);
            client.authenticate(&user, &pass, &live, &budget, &mut link)?;
            let accepted = link.transcript().frames().iter().any(|(d, f)| {
                *d == Direction::ServerToClient
                    && wire::decode(f).ok() == Some(Message::Status(Status::Accepted))
            });
            let last = link
                .transcript()
                .frames()
                .last()
                .map(|(_, f)| wire::decode(f));
            let decided = matches!(last, Some(Ok(Message::RiskReply { .. })));
            if accepted && decided {
                Ok(())
            } else {
                Err(Error::Protocol("missing acceptance or decision".into()))
            }
        })();
        failures += ok.is_err() as u32;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(failures == 0, || format!("{failures} of 1000 flows failed"))?;
    ensure(secs < 30.0, || format!("took {secs:.2} s"))?;
    Ok(format!("1000 flows, 0 failures, {secs:.2} s"))
}

fn exhaustive_oprf<Gs: PrimeOrderGroup>(
    elements: &[Gs::Element],
    scalars: &[Gs::Scalar],
) -> Result<u64, String> {
    let mut checked = 0u64;
    for x in scalars.iter().filter(|s| !Gs::scalar_is_zero(s)) {
        let y = Gs::base_exp(x);
        for h in elements.iter().filter(|e| !Gs::is_identity(e)) {
            let digest = CredentialDigest::<Gs>::from_element(*h).unwrap();
            let direct = Gs::exp(h, x);
            for b in scalars {
                let state = oprf::blind_with(&digest, *b);
                let blinded = *state.blinded();
                let evaluated = match oprf::evaluate::<Gs>(&blinded, x) {
                    Ok(e) => e,
                    // h = g^-b: the server refuses the identity; the algebra still closes.
                    Err(_) if Gs::is_identity(&blinded) => Gs::exp(&blinded, x),
                    Err(e) => return Err(format!("evaluate failed: {e}")),
                };
                let out = oprf::unblind(&evaluated, &y, state);
                if *out.element() != direct {
                    return Err(format!("mismatch at h={h:?} x={x:?} b={b:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn c2_oprf_exhaustive() -> Outcome {
    let e23: Vec<_> = Toy23::elements().collect();
    let s23: Vec<_> = Toy23::scalars().collect();
    let e179: Vec<_> = Toy179::elements().collect();
    let s179: Vec<_> = Toy179::scalars().collect();
    let n = exhaustive_oprf::<Toy23>(&e23, &s23)? + exhaustive_oprf::<Toy179>(&e179, &s179)?;
    Ok(format!(
        "{n} (element, key, blinding) triples over orders 23 and 179, all equal"
    ))
}

fn c3_token_soundness() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA3);
    let keys = KeyPair::<G>::generate(&mut rng);
    let x = *keys.secret();
    let server = Arc::new(Server::new(
        keys,
        RiskPolicy::with_defaults(unit_bounds(1)).unwrap(),
    ));
    let other = KeyPair::<G>::generate(&mut rng);

    // One honest registration under each key.
    let digest = oprf::derive_digest::<G>("victim", "pw").unwrap();
    let out_x =
        oprf::OprfOutput::<G>::from_bytes(&G::encode(&G::exp(digest.element(), &x))).unwrap();
    let out_other =
        oprf::OprfOutput::<G>::from_bytes(&G::encode(&G::exp(digest.element(), other.secret())))
            .unwrap();
    let issue_token = |out: &oprf::OprfOutput<G>, key: &KeyPair<G>, rng: &mut ChaCha20Rng| {
        let (req, sec) = token::new_session(out, &digest, rng);
        let t_prime = token::issue(&req, key.secret()).unwrap();
        token::unblind_token(&t_prime, key.public(), sec)
    };

    let mut accepts = 0u32;
    let mut tried = 0u32;
    let present = |tok: &SessionToken<G>, accepts: &mut u32| {
        if token::verify(tok, &x) {
            *accepts += 1;
        }
    };
    for i in 0..10_000u32 {
        let forged = match i % 3 {
            0 => SessionToken {
                token: G::hash_to_group(&rng.gen::<[u8; 32]>()),
                blinded_hash: G::hash_to_group(&rng.gen::<[u8; 32]>()),
                session_id: G::hash_to_group(&rng.gen::<[u8; 32]>()),
            },
            1 => {
                let mut tok = issue_token(&out_x, server.keys(), &mut rng);
                tok.session_id = G::hash_to_group(&rng.gen::<[u8; 32]>());
                tok
            }
            _ => issue_token(&out_other, &other, &mut rng),
        };
        present(&forged, &mut accepts);
        tried += 1;
        // Every tenth forgery also goes through a live server connection.
        if i % 10 == 0 {
            let mut conn = server.connect();
            let (req, _) = token::new_session(&out_x, &digest, &mut rng);
            let msg = Message::SessionRequest([
                G::encode(&req.blinded_eval),
                G::encode(&req.blinded_hash),
                G::encode(&req.blinded_session),
            ]);
            conn.handle(&wire::encode(&msg));
            let pres = Message::TokenPresentation([
                G::encode(&forged.token),
                G::encode(&forged.blinded_hash),
                G::encode(&forged.session_id),
            ]);
            let reply = wire::decode(&conn.handle(&wire::encode(&pres))[0]).unwrap();
            if reply == Message::Status(Status::Accepted) {
                accepts += 1;
            }
        }
    }
    // Replaying an honest, already-spent token.
    let honest = issue_token(&out_x, server.keys(), &mut rng);
    ensure(token::verify(&honest, &x), || {
        "honest token failed to verify".into()
    })?;
    server
        .replay_guard()
        .check_and_insert(G::encode(&honest.session_id))
        .unwrap();
    ensure(
        server
            .replay_guard()
            .check_and_insert(G::encode(&honest.session_id))
            .is_err(),
        || "spent session id accepted twice".into(),
    )?;
    ensure(accepts == 0, || format!("{accepts} forgeries accepted"))?;
    Ok(format!(
        "{tried} forgeries (random, re-bound session id, foreign key), 0 accepted"
    ))
}

fn server_visible_elements(t: &Transcript) -> Vec<[u8; 32]> {
    let mut out = Vec::new();
    for (_, f) in t.frames() {
        match wire::decode(f).unwrap() {
            Message::SessionRequest(p) | Message::TokenPresentation(p) => out.extend(p),
            Message::BlindTokenReply(e) => out.push(e),
            _ => {}
        }
    }
    out
}

fn c4_unlinkability() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(0xA4);
    let policy = RiskPolicy::with_defaults(unit_bounds(2)).unwrap();
    let server = Arc::new(Server::<G>::generate(policy, &mut rng));
    let mut client = Client::<G>::new(ChaCha20Rng::seed_from_u64(0xA44));
    let mut link = LoopbackTransport::connect(&server);
    client
        .register(
            "fixed",
            "credential",
            &FeatureVector::new(vec![0.5, 0.5], unit_bounds(2)).unwrap(),
            &mut link,
            &vault::MemoryStore::default(),
            &Registry::in_memory(),
        )
        .map_err(|e| e.to_string())?;
    let budget = PrivacyBudget::for_policy(1.0, server.policy()).unwrap();
    // H^t shows up in both the request and the presentation of one session;
    // only repeats across sessions count as links.
    let mut seen = HashSet::new();
    let mut total = 0;
    for _ in 0..2 * 1000 {
        let mut link = LoopbackTransport::connect(&server);
        client
            .authenticate("fixed", "credential", &[0.5, 0.5], &budget, &mut link)
            .map_err(|e| e.to_string())?;
        let session: HashSet<_> = server_visible_elements(link.transcript())
            .into_iter()
            .collect();
        ensure(session.len() == 6, || {
            format!("session exposed {} distinct elements", session.len())
        })?;
        total += session.len();
        seen.extend(session);
    }
    ensure(seen.len() == total, || {
        format!("{} collisions", total - seen.len())
    })?;
    Ok(format!(
        "1000 session pairs, {total} server-visible elements, 0 collisions"
    ))
}

fn c5_laplace() -> Outcome {
    let policy = RiskPolicy::new(vec![1.0], unit_bounds(1), 0.33, 0.66).unwrap();
    let budget = PrivacyBudget::for_policy(1.0, &policy).unwrap();
    let lambda = budget.scale();
    let mut rng = ChaCha20Rng::seed_from_u64(0xA5);
    let n = 100_000;
    let samples: Vec<f64> = (0..n)
        .map(|_| laplace_sample(lambda, &mut rng).unwrap())
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mad = samples.iter().map(|s| s.abs()).sum::<f64>() / n as f64;
    ensure(mean.abs() <= 0.02 * lambda, || {
        format!("|mean| = {:.5} > 0.02 λ", mean.abs())
    })?;
    ensure((mad / lambda - 1.0).abs() <= 0.03, || {
        format!("MAD/λ = {:.4}", mad / lambda)
    })?;

    // Adjacent inputs 0 and Δf through the real mechanism.
    let df = budget.sensitivity();
    let (lo, hi) = (-2.0 * lambda, df + 2.0 * lambda);
    let bins = 50;
    let hist = |x: f64, rng: &mut ChaCha20Rng| {
        let v = FeatureVector::new(vec![x], unit_bounds(1)).unwrap();
        let mut h = vec![0u64; bins];
        for _ in 0..1_000_000 {
            let y = privatize(&v, &budget, rng).values()[0];
            if (lo..hi).contains(&y) {
                h[((y - lo) / (hi - lo) * bins as f64) as usize] += 1;
            }
        }
        h
    };
    let h0 = hist(0.0, &mut rng);
    let h1 = hist(df, &mut rng);
    let mut worst: f64 = 0.0;
    for (a, b) in h0.iter().zip(&h1) {
        ensure(*a > 0 && *b > 0, || "empty histogram bin".into())?;
        let r = (*a as f64 / *b as f64).max(*b as f64 / *a as f64);
        worst = worst.max(r);
    }
    let bound = budget.epsilon().exp() * 1.1;
    ensure(worst <= bound, || {
        format!("max bin ratio {worst:.4} > {bound:.4}")
    })?;
    Ok(format!(
        "λ={lambda}, mean={mean:+.5}, MAD/λ={:.4}, max ratio {worst:.4} ≤ {bound:.4}",
        mad / lambda
    ))
}

fn c6_wire_sizes() -> Outcome {
    let e = [0u8; 32];
    ensure(Message::ServerPubKey(e).payload().len() == 32, || {
        "pubkey".into()
    })?;
    ensure(Message::BlindedOprfInput(e).payload().len() == 32, || {
        "hash".into()
    })?;
    ensure(Message::BlindTokenReply(e).payload().len() == 32, || {
        "token".into()
    })?;
    ensure(
        Message::TokenPresentation([e; 3]).payload().len() == 3 * 32,
        || "presentation".into(),
    )?;
    let rr = Message::risk_reply(0.5, privrba_core::AuthRequirement::StepUp).payload();
    ensure(rr.len() == 8, || "risk reply".into())?;
    for n in 1..=30 {
        let m = Message::private_features(&vec![0.25; n], &vec![0.75; n]).unwrap();
        let framed = wire::encode(&m);
        ensure(m.payload().len() == 2 * 32 * n, || {
            format!("features at n_f={n}")
        })?;
        ensure(framed.len() == HEADER_LEN + 2 * 32 * n, || {
            format!("frame at n_f={n}")
        })?;
        ensure(
            MessageKind::PrivateFeatures.payload_len(n) == 2 * 32 * n,
            || "payload_len".into(),
        )?;
    }
    // Sizes observed on a live transcript.
    let t = run_trial(
        3,
        &NetConfig {
            base_loss: 0.0,
            ..NetConfig::default()
        },
        [6; 32],
    )
    .map_err(|e| e.to_string())?;
    let expected = [32 + 32 + 32, 32 + 96 + 32 + 96 + 4 + 2 * 32 * 3 + 8];
    let got = [
        t.setup.link.bytes_sent as usize - 3 * HEADER_LEN,
        t.auth.link.bytes_sent as usize - 7 * HEADER_LEN,
    ];
    ensure(got == expected, || {
        format!("live payload bytes {got:?} != {expected:?}")
    })?;
    Ok("pubkey 32, hash 32, token 32, features 64·n_f (n_f=1..30), score 4, adjustment 4".into())
}

fn bench_rows() -> &'static Vec<BenchRow> {
    use std::sync::OnceLock;
    static ROWS: OnceLock<Vec<BenchRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        run_benchmark(
            &DEFAULT_FEATURE_COUNTS,
            &NetConfig::default(),
            DEFAULT_TRIALS,
        )
        .unwrap()
    })
}

fn c7_retransmissions() -> Outcome {
    let cfg = NetConfig {
        base_loss: 0.1,
        congestion: 1.0,
        ..NetConfig::default()
    };
    let mut rng = ChaCha20Rng::seed_from_u64(0xA7);
    let n = 10_000;
    let total: u64 = (0..n)
        .map(|_| simnet::transmit(&[0u8; 64], &cfg, &mut rng).retransmissions)
        .sum();
    let mean = total as f64 / n as f64;
    ensure((0.09..=0.13).contains(&mean), || {
        format!("single-chunk mean {mean:.4}")
    })?;
    let cells: Vec<_> = bench_rows()
        .iter()
        .filter(|r| r.metric == "retransmissions")
        .collect();
    ensure(cells.len() == 2 * DEFAULT_FEATURE_COUNTS.len(), || {
        "missing retransmission rows".into()
    })?;
    let worst = cells.iter().map(|r| r.mean).fold(0.0, f64::max);
    for r in &cells {
        ensure((0.0..=0.2).contains(&r.mean), || {
            format!(
                "n_f={} {} retransmissions {:.4} outside [0, 0.2]",
                r.n_f, r.phase, r.mean
            )
        })?;
    }
    Ok(format!(
        "single-chunk mean {mean:.4}; benchmark cells max {worst:.4}"
    ))
}

fn c8_op_counts() -> Outcome {
    for n in [1usize, 5, 30] {
        let t = run_trial(n, &NetConfig::default(), [n as u8; 32]).map_err(|e| e.to_string())?;
        let n64 = n as u64;
        let client = OpCounts {
            hashes: 1,
            prf_evaluations: 1,
            symmetric_decryptions: 1,
            noise_additions: 2 * n64,
            ..Default::default()
        };
        let server = OpCounts {
            prf_evaluations: 1,
            token_verifications: 1,
            feature_aggregations: n64,
            risk_computations: 1,
            decisions: 1,
            ..Default::default()
        };
        ensure(t.auth.client.ops == client, || {
            format!("client auth at n_f={n}: {:?}", t.auth.client.ops)
        })?;
        ensure(t.auth.server.ops == server, || {
            format!("server auth at n_f={n}: {:?}", t.auth.server.ops)
        })?;
        let client_setup = OpCounts {
            symmetric_keygens: 1,
            asymmetric_keygens: 1,
            feature_extractions: n64,
            symmetric_encryptions: 1,
            hashes: 1,
            prf_evaluations: 1,
            ..Default::default()
        };
        let server_setup = OpCounts {
            asymmetric_keygens: 1,
            prf_evaluations: 1,
            ..Default::default()
        };
        ensure(t.setup.client.ops == client_setup, || {
            format!("client setup at n_f={n}")
        })?;
        ensure(t.setup.server.ops == server_setup, || {
            format!("server setup at n_f={n}")
        })?;
    }
    Ok("client auth 1/1/1/2n_f, server auth 1/1/n_f/1/1 at n_f = 1, 5, 30".into())
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn client_auth(rows: &[BenchRow], metric: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.phase == Phase::Auth && r.side == Side::Client && r.metric == metric)
        .map(|r| r.mean)
        .collect()
}

fn c9_scaling() -> Outcome {
    let rows = bench_rows();
    let model = client_auth(rows, "compute_model_ms");
    let ops = client_auth(rows, "ops");
    let xs: Vec<f64> = DEFAULT_FEATURE_COUNTS.iter().map(|&n| n as f64).collect();
    ensure(model.len() == xs.len(), || {
        "missing client auth rows".into()
    })?;
    ensure(model.windows(2).all(|w| w[0] <= w[1]), || {
        format!("modeled time not monotone: {model:?}")
    })?;
    ensure(ops.first() < ops.last(), || "ops do not grow".into())?;
    let r2 = r_squared(&xs, &ops);
    ensure(r2 > 0.99, || format!("R² = {r2}"))?;

    // Wall-clock is reported but not asserted.
    let wall_rows = run_benchmark_with(
        &DEFAULT_FEATURE_COUNTS,
        &NetConfig::default(),
        DEFAULT_TRIALS,
        &BenchOptions {
            wall_clock: true,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let wall = client_auth(&wall_rows, "compute_wall_ms");
    let wall_monotone = wall.windows(2).all(|w| w[0] <= w[1]);
    Ok(format!(
        "modeled client-auth ms monotone {:.4}..{:.4}, ops R² = {r2:.6}; wall-clock ms {:?} (monotone: {wall_monotone}, informational)",
        model[0],
        model[model.len() - 1],
        wall.iter().map(|w| (w * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    ))
}

fn c10_backup_recovery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let store = DirStore::open(dir.path().join("cas")).map_err(|e| e.to_string())?;
    let registry =
        Registry::<G>::open(dir.path().join("registry.journal")).map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(0xAA);
    let (mut restored, mut rejected) = (0, 0);
    for i in 0..100 {
        let n = rng.gen_range(1..=30);
        let bounds: Vec<Bounds> = (0..n)
            .map(|_| {
                let lo = rng.gen_range(-1e6..1e6);
                Bounds::new(lo, lo + rng.gen_range(1e-3..1e6)).unwrap()
            })
            .collect();
        let values: Vec<f64> = bounds.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect();
        let v = FeatureVector::new(values, bounds).unwrap();
        let owner = KeyPair::<G>::generate(&mut rng);
        let key = SymmetricKey::generate(&mut rng);

        let old_ct = vault::encrypt_profile(&key, &v, &mut rng);
        let old_cid = store.put(&old_ct).map_err(|e| e.to_string())?;
        let old_entry = vault::registry_update(&registry, &owner, old_cid, &mut rng)
            .map_err(|e| e.to_string())?;
        let newer = v
            .with_values(
                v.bounds()
                    .iter()
                    .map(|b| rng.gen_range(b.lo..=b.hi))
                    .collect(),
            )
            .unwrap();
        let ct = vault::encrypt_profile(&key, &newer, &mut rng);
        let cid = store.put(&ct).map_err(|e| e.to_string())?;
        vault::registry_update(&registry, &owner, cid, &mut rng).map_err(|e| e.to_string())?;

        // A new device holding only the key and the owner id.
        let got =
            vault::recover(&registry, &store, owner.public(), &key).map_err(|e| e.to_string())?;
        let bits = |f: &FeatureVector| {
            f.values()
                .iter()
                .chain(f.bounds().iter().flat_map(|b| [&b.lo, &b.hi]))
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        };
        ensure(bits(&got) == bits(&newer), || {
            format!("cycle {i}: recovered vector differs")
        })?;
        restored += 1;

        let rollback = registry.submit(old_entry);
        let still_latest = registry.latest(owner.public()).map(|e| e.cid) == Some(cid);
        let wrong_key = vault::recover(
            &registry,
            &store,
            owner.public(),
            &SymmetricKey::generate(&mut rng),
        );
        if matches!(rollback, Err(Error::StaleCounter { .. }))
            && still_latest
            && matches!(wrong_key, Err(Error::DecryptionFailed))
        {
            rejected += 1;
        }
    }
    ensure(rejected == 100, || {
        format!("only {rejected} of 100 adversarial variants rejected")
    })?;
    Ok(format!("{restored} bit-identical recoveries, {rejected}/100 rollback + wrong-key variants rejected"))
}

fn transcript_run() -> Vec<u8> {
    let cfg = NetConfig {
        seed: 0xB11,
        ..NetConfig::default()
    };
    let server = Arc::new(Server::<G>::generate(
        RiskPolicy::with_defaults(unit_bounds(4)).unwrap(),
        &mut ChaCha20Rng::seed_from_u64(1),
    ));
    let mut client = Client::<G>::new(ChaCha20Rng::seed_from_u64(2));
    let mut link = SimTransport::connect(&server, cfg).unwrap();
    client
        .register(
            "det",
            "pw",
            &FeatureVector::new(vec![0.1, 0.4, 0.6, 0.9], unit_bounds(4)).unwrap(),
            &mut link,
            &vault::MemoryStore::default(),
            &Registry::in_memory(),
        )
        .unwrap();
    let mut bytes = link.transcript().to_bytes();
    let budget = PrivacyBudget::for_policy(1.0, server.policy()).unwrap();
    let mut link = SimTransport::connect(&server, cfg).unwrap();
    client
        .authenticate("det", "pw", &[0.2, 0.4, 0.6, 0.8], &budget, &mut link)
        .unwrap();
    bytes.extend(link.transcript().to_bytes());
    bytes.extend(format!("{:?}", link.report()).bytes());
    bytes
}

fn c11_determinism() -> Outcome {
    let (a, b) = (transcript_run(), transcript_run());
    ensure(a == b, || "transcripts differ".into())?;
    let csv = || {
        let mut out = Vec::new();
        write_csv(
            &run_benchmark(
                &DEFAULT_FEATURE_COUNTS,
                &NetConfig::default(),
                DEFAULT_TRIALS,
            )
            .unwrap(),
            &mut out,
        )
        .unwrap();
        out
    };
    let (x, y) = (csv(), csv());
    ensure(x == y, || "benchmark CSVs differ".into())?;
    Ok(format!(
        "transcripts ({} B) and CSVs ({} B) byte-identical across two runs",
        a.len(),
        x.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("protocol completeness", c1_protocol_completeness),
        ("OPRF algebra, exhaustively", c2_oprf_exhaustive),
        ("token soundness", c3_token_soundness),
        ("structural unlinkability", c4_unlinkability),
        ("Laplace mechanism statistics", c5_laplace),
        ("wire sizes", c6_wire_sizes),
        ("retransmission statistics", c7_retransmissions),
        ("operation counts", c8_op_counts),
        ("scaling (modeled compute, R²)", c9_scaling),
        ("backup/recovery fidelity", c10_backup_recovery),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

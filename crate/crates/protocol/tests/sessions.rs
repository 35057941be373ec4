use std::net::TcpListener;
use std::time::Duration;

use dpoq_core::tcf::{Family, TcfKey};
use dpoq_core::BitVec;
use dpoq_protocol::invert::{bell_gamma, bell_success_probability, encoded_invert, likely_bit};
use dpoq_protocol::message::Bits;
use dpoq_protocol::session::{
    connect, run_local, run_verifier, serve, ProverKind, SessionConfig, EXIT_ACCEPT, EXIT_PROTOCOL, EXIT_REJECT,
};
use dpoq_protocol::wire::{encode_frame, ChannelTransport, Direction, Transcript, Transport};
use dpoq_protocol::{Message, Phi, Protocol, ProtocolError, Verdict};
use dpoq_qsim::{Engine, ProverCircuit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn config(protocol: Protocol, rounds: usize, seed: u64) -> SessionConfig {
    SessionConfig {
        protocol,
        rounds,
        seed,
        ..Default::default()
    }
}

#[test]
fn honest_bcmvv_accepts_with_unit_gap() {
    let o = run_local(&config(Protocol::Bcmvv, 200, 1));
    let r = o.result.as_ref().unwrap();
    assert_eq!((r.p_pre, r.p_eq_or_bell, r.gap), (1.0, 1.0, 1.0));
    assert_eq!((r.depth, r.interleavings), (14, 3));
    assert_eq!(r.verdict, Verdict::Accept);
    assert_eq!(o.exit_code(), EXIT_ACCEPT);
}

#[test]
fn honest_kmcvy_accepts() {
    let o = run_local(&config(Protocol::Kmcvy, 600, 2));
    let r = o.result.unwrap();
    assert_eq!(r.p_pre, 1.0);
    assert_eq!((r.depth, r.interleavings), (18, 4));
    assert_eq!(r.verdict, Verdict::Accept);
}

#[test]
fn classical_baseline_is_rejected() {
    for protocol in [Protocol::Bcmvv, Protocol::Kmcvy] {
        let mut cfg = config(protocol, 600, 3);
        cfg.prover = ProverKind::Classical;
        let o = run_local(&cfg);
        let r = o.result.as_ref().unwrap();
        assert_eq!(r.p_pre, 1.0);
        assert_eq!(r.verdict, Verdict::Reject, "{protocol}");
        assert_eq!(o.exit_code(), EXIT_REJECT);
    }
}

#[test]
fn rabin_sessions_resample_degenerate_commits() {
    let mut cfg = config(Protocol::Bcmvv, 40, 4);
    cfg.family = Family::Rabin;
    let o = run_local(&cfg);
    let r = o.result.as_ref().unwrap();
    assert_eq!(r.verdict, Verdict::Accept);
    let resamples = o
        .transcript
        .messages()
        .unwrap()
        .iter()
        .filter(|(_, m)| matches!(m, Message::Resample { .. }))
        .count();
    assert!(resamples > 0);
    let commits = resamples + 40;
    assert!((r.degenerate_rate - resamples as f64 / commits as f64).abs() < 1e-12);
}

#[test]
fn transcripts_are_deterministic_and_replayable() {
    let cfg = config(Protocol::Kmcvy, 30, 5);
    let a = run_local(&cfg);
    let b = run_local(&cfg);
    assert_eq!(a.transcript.canonical(), b.transcript.canonical());
    let other = run_local(&config(Protocol::Kmcvy, 30, 6));
    assert_ne!(a.transcript.canonical(), other.transcript.canonical());

    // Feeding the recorded prover messages to a fresh verifier reproduces
    // every verifier message, including the verdict.
    let msgs = a.transcript.messages().unwrap();
    let mut v = cfg.verifier().unwrap();
    let mut replayed = vec![v.open()];
    for (dir, m) in &msgs {
        if *dir == Direction::ToVerifier {
            replayed.extend(v.handle(m.clone()).unwrap());
        }
    }
    let recorded: Vec<Message> = msgs
        .into_iter()
        .filter(|(d, _)| *d == Direction::ToProver)
        .map(|(_, m)| m)
        .collect();
    assert_eq!(replayed, recorded);
    assert_eq!(v.report(), a.result.as_ref().ok());
}

#[test]
fn transcript_round_trips_through_text() {
    let o = run_local(&config(Protocol::Bcmvv, 5, 7));
    let text = o.transcript.to_jsonl();
    assert_eq!(Transcript::parse(&text).unwrap(), o.transcript);
}

#[test]
fn golden_transcript() {
    let o = run_local(&config(Protocol::Bcmvv, 24, 42));
    assert_eq!(o.exit_code(), EXIT_ACCEPT);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/bcmvv_toy_seed42.jsonl");
    if std::env::var_os("DPOQ_UPDATE_GOLDEN").is_some() {
        std::fs::write(path, o.transcript.canonical()).unwrap();
    }
    let golden = std::fs::read_to_string(path).unwrap();
    assert_eq!(o.transcript.canonical(), golden);
}

#[test]
fn tcp_matches_local() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let cfg = config(Protocol::Kmcvy, 20, 8);
    let server_cfg = cfg.clone();
    let server = std::thread::spawn(move || serve(&server_cfg, &listener, 1).unwrap());
    let client = connect(&cfg, &addr);
    let served = server.join().unwrap().pop().unwrap();
    let local = run_local(&cfg);
    assert_eq!(served.transcript.canonical(), local.transcript.canonical());
    assert_eq!(client.transcript.canonical().lines().count(), local.transcript.entries.len());
    assert_eq!(served.result.unwrap(), local.result.unwrap());
    assert_eq!(client.result.unwrap().verdict, Verdict::Accept);
}

#[test]
fn concurrent_tcp_sessions_are_independent() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let cfg = config(Protocol::Bcmvv, 40, 9);
    let server_cfg = cfg.clone();
    let server = std::thread::spawn(move || serve(&server_cfg, &listener, 3).unwrap());
    let clients: Vec<_> = (0..3)
        .map(|_| {
            let cfg = cfg.clone();
            let addr = addr.clone();
            std::thread::spawn(move || connect(&cfg, &addr))
        })
        .collect();
    for c in clients {
        assert_eq!(c.join().unwrap().exit_code(), EXIT_ACCEPT);
    }
    let outcomes = server.join().unwrap();
    let ids: std::collections::BTreeSet<String> = outcomes
        .iter()
        .map(|o| o.transcript.entries[0].frame.session.clone())
        .collect();
    assert_eq!(ids.len(), 3);
}

#[test]
fn out_of_order_frame_is_a_protocol_error() {
    let cfg = config(Protocol::Bcmvv, 3, 10);
    let (vt, mut peer) = ChannelTransport::pair(Duration::from_secs(5));
    let session = cfg.session_id();
    let s2 = session.clone();
    let h = std::thread::spawn(move || {
        let _key = peer.recv_line().unwrap();
        peer.send_line(&encode_frame(&s2, 0, &Message::BellBit { round: 0, bit: 1 }))
            .unwrap();
        peer.recv_line().unwrap()
    });
    let o = run_verifier(cfg.verifier().unwrap(), vt, session);
    assert!(matches!(o.result, Err(ProtocolError::Order { .. })));
    assert_eq!(o.exit_code(), EXIT_PROTOCOL);
    assert!(h.join().unwrap().contains(r#""type":"abort""#));
}

#[test]
fn replayed_sequence_number_is_rejected() {
    let cfg = config(Protocol::Bcmvv, 3, 11);
    let (vt, mut peer) = ChannelTransport::pair(Duration::from_secs(5));
    let session = cfg.session_id();
    let v = cfg.verifier().unwrap();
    let (key, _) = TcfKey::gen(cfg.family, cfg.size, &mut cfg.seeds().key_rng()).unwrap();
    let p = ProverCircuit::new(&key).unwrap();
    let s2 = session.clone();
    std::thread::spawn(move || {
        let _ = peer.recv_line();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = p.commit(Engine::Shortcut, false, &mut rng).unwrap();
        let m = Message::Commit { round: 0, y_hat: Bits(c.y_hat) };
        peer.send_line(&encode_frame(&s2, 5, &m)).unwrap();
        let _ = peer.recv_line();
        peer.send_line(&encode_frame(&s2, 5, &m)).unwrap();
        let _ = peer.recv_line();
    });
    let o = run_verifier(v, vt, session);
    assert!(matches!(o.result, Err(ProtocolError::Sequence { .. })), "{:?}", o.result);
}

#[test]
fn prover_silence_times_out() {
    let mut cfg = config(Protocol::Bcmvv, 3, 12);
    cfg.timeout = Duration::from_millis(50);
    let (vt, _peer) = ChannelTransport::pair(cfg.timeout);
    let o = run_verifier(cfg.verifier().unwrap(), vt, cfg.session_id());
    assert!(matches!(o.result, Err(ProtocolError::Timeout)));
}

#[test]
fn invalid_configs_are_refused() {
    let mut cfg = config(Protocol::Kmcvy, 0, 0);
    assert!(matches!(run_local(&cfg).result, Err(ProtocolError::Config(_))));
    cfg.rounds = 5;
    cfg.threshold = 0.0;
    assert!(matches!(run_local(&cfg).result, Err(ProtocolError::Config(_))));
}

#[test]
fn bell_success_probability_is_exact_every_round() {
    let target = bell_success_probability();
    for (key, trapdoor) in [
        TcfKey::toy_from_parts(3, vec![3, 0, 6, 1, 7, 2, 5, 4], 5).unwrap(),
        TcfKey::rabin_from_primes(3, 7).unwrap(),
    ] {
        let p = ProverCircuit::new(&key).unwrap();
        let f = p.function().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut rounds = 0;
        while rounds < 150 {
            let c = p.commit(Engine::Shortcut, true, &mut rng).unwrap();
            let Some(post) = c.post else { continue };
            rounds += 1;
            let (x0, x1) = encoded_invert(&trapdoor, &key, &f, &c.y_hat).unwrap().unwrap();
            let v = BitVec::random(f.preimage_len(), &mut rng);
            let mut m = c.meter.clone();
            let (d, pending) = post.bell_measure(&v, &mut rng, &mut m).unwrap();
            let gamma = bell_gamma(&x0, &x1, &v, &d);
            for phi in [Phi::Plus, Phi::Minus] {
                let probs = pending.outcome_probabilities(phi.radians());
                let p_likely = probs[likely_bit(gamma, phi) as usize];
                assert!((p_likely - target).abs() < 1e-9, "{gamma:?} {phi:?} {probs:?}");
            }
        }
    }
}

#[test]
fn every_toy_preimage_inverts_to_its_claw() {
    let (key, trapdoor) = TcfKey::toy_from_parts(3, vec![3, 0, 6, 1, 7, 2, 5, 4], 5).unwrap();
    let p = ProverCircuit::new(&key).unwrap();
    let f = p.function();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for x in 0..8u64 {
        for _ in 0..20 {
            let pre = f.random_preimage(&BitVec::from_u64(x, 3), &mut rng);
            let y_hat = f.apply_hat(&pre).unwrap();
            let (a, b) = encoded_invert(&trapdoor, &key, f, &y_hat).unwrap().unwrap();
            assert!(pre == a || pre == b);
            assert_eq!(f.apply_hat(&a).unwrap(), y_hat);
            assert_eq!(f.apply_hat(&b).unwrap(), y_hat);
            assert_eq!(f.input_of(&a).to_u64() ^ f.input_of(&b).to_u64(), 5);
        }
    }
}

#[test]
fn reserved_image_is_degenerate() {
    let (key, trapdoor) = TcfKey::rabin_from_primes(3, 7).unwrap();
    let p = ProverCircuit::new(&key).unwrap();
    let f = p.function();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    // 0 is never a legal Rabin input, so it maps to the reserved image.
    let pre = f.random_preimage(&BitVec::zeros(f.num_inputs()), &mut rng);
    let y_hat = f.apply_hat(&pre).unwrap();
    assert_eq!(Some(f.decode(&y_hat).unwrap()), key.reserved_image());
    assert_eq!(encoded_invert(&trapdoor, &key, f, &y_hat).unwrap(), None);
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn verifier_randomness_is_uniform() {
    let o = run_local(&config(Protocol::Kmcvy, 2000, 16));
    let mut c = [0u64; 2];
    let mut phi = [0u64; 2];
    let mut nibbles = [0u64; 16];
    for (_, m) in o.transcript.messages().unwrap() {
        match m {
            Message::Challenge { c: b, .. } => c[b as usize] += 1,
            Message::BellPhi { phi: p, .. } => phi[(p == Phi::Minus) as usize] += 1,
            Message::BellV { v, .. } => {
                for k in 0..v.0.len() / 4 {
                    nibbles[v.0.slice(4 * k..4 * k + 4).to_u64() as usize] += 1;
                }
            }
            _ => {}
        }
    }
    for counts in [&c[..], &phi[..], &nibbles[..]] {
        let p = chi_square_p(counts);
        assert!(p > 0.01, "{counts:?} p = {p}");
    }
}

#[test]
fn rounds_replay_in_isolation() {
    let cfg = config(Protocol::Bcmvv, 1, 17);
    let seeds = cfg.seeds();
    let mut a = seeds.step_rng(dpoq_protocol::seeds::PROVER, 9, 0);
    let mut b = seeds.step_rng(dpoq_protocol::seeds::PROVER, 9, 0);
    assert_eq!(a.gen::<u64>(), b.gen::<u64>());
}

#[test]
fn too_few_rounds_cannot_accept() {
    // Four perfect rounds leave the lower confidence bound of the gap negative.
    let o = run_local(&config(Protocol::Bcmvv, 4, 42));
    let r = o.result.unwrap();
    assert_eq!(r.gap, 1.0);
    assert!(r.ci_low < 0.0);
    assert_eq!(r.verdict, Verdict::Reject);
}

//! Session configuration and the drivers that pump messages between a
//! verifier, a prover and a transport.

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use dpoq_core::tcf::{Family, TcfKey};
use dpoq_qsim::Engine;
use serde::Serialize;

use crate::error::{ProtocolError, Result};
use crate::message::{Message, Protocol};
use crate::prover::{ClassicalProver, ProverLogic, QuantumProver};
use crate::score::{Report, Verdict, DEFAULT_THRESHOLD};
use crate::seeds::SessionSeeds;
use crate::verifier::{Verifier, DEFAULT_MAX_RESAMPLES};
use crate::wire::{ChannelTransport, Direction, Link, TcpTransport, Transcript, Transport, DEFAULT_TIMEOUT};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 2;
pub const EXIT_PROTOCOL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProverKind {
    Honest,
    Classical,
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub protocol: Protocol,
    pub family: Family,
    /// Prime bit length (Rabin) or input width (toy). Plays the role of the
    /// security parameter, as a size knob only.
    pub size: usize,
    pub rounds: usize,
    /// Threshold `T` of the KMCVY acceptance rule.
    pub threshold: f64,
    pub seed: u64,
    pub session_index: u64,
    pub prover: ProverKind,
    pub engine: Engine,
    pub timeout: Duration,
    pub max_resamples: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            protocol: Protocol::Bcmvv,
            family: Family::Toy,
            size: 3,
            rounds: 100,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
            session_index: 0,
            prover: ProverKind::Honest,
            engine: Engine::Shortcut,
            timeout: DEFAULT_TIMEOUT,
            max_resamples: DEFAULT_MAX_RESAMPLES,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(ProtocolError::Config("rounds must be at least 1".into()));
        }
        if self.protocol == Protocol::Kmcvy && self.threshold <= 0.0 {
            return Err(ProtocolError::Config("threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn seeds(&self) -> SessionSeeds {
        SessionSeeds::new(self.seed, self.session_index)
    }

    pub fn session_id(&self) -> String {
        format!("{:016x}-{}", self.seed, self.session_index)
    }

    pub fn verifier(&self) -> Result<Verifier> {
        self.validate()?;
        let seeds = self.seeds();
        let (key, trapdoor) = TcfKey::gen(self.family, self.size, &mut seeds.key_rng())?;
        Ok(Verifier::new(self.protocol, self.rounds, self.threshold, key, trapdoor, seeds)?
            .with_max_resamples(self.max_resamples))
    }

    pub fn prover(&self) -> Box<dyn ProverLogic> {
        match self.prover {
            ProverKind::Honest => Box::new(QuantumProver::new(self.seeds(), self.engine)),
            ProverKind::Classical => Box::new(ClassicalProver::new(self.seeds())),
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub result: Result<Report>,
    pub transcript: Transcript,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.result)
    }
}

pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.verdict == Verdict::Accept => EXIT_ACCEPT,
        Ok(_) => EXIT_REJECT,
        Err(_) => EXIT_PROTOCOL,
    }
}

/// Runs the verifier over `transport` until a verdict or an error. Errors
/// are reported to the peer with an abort message.
pub fn run_verifier<T: Transport>(mut verifier: Verifier, transport: T, session: String) -> Outcome {
    let mut link = Link::new(transport, Some(session), Direction::ToProver, true);
    let result = pump_verifier(&mut verifier, &mut link);
    if let Err(e) = &result {
        if !matches!(e, ProtocolError::Aborted(_) | ProtocolError::Closed) || verifier.report().is_none() {
            let _ = link.send(&Message::Abort { reason: e.to_string() });
        }
    }
    Outcome {
        result,
        transcript: link.transcript.take().unwrap_or_default(),
    }
}

fn pump_verifier<T: Transport>(verifier: &mut Verifier, link: &mut Link<T>) -> Result<Report> {
    link.send(&verifier.open())?;
    while !verifier.is_done() {
        let msg = link.recv()?;
        if let Message::Abort { reason } = msg {
            return Err(ProtocolError::Aborted(reason));
        }
        for out in verifier.handle(msg)? {
            link.send(&out)?;
        }
    }
    Ok(verifier.report().cloned().expect("finished verifier has a report"))
}

/// Runs a prover until the verdict arrives.
pub fn run_prover<T: Transport>(prover: &mut dyn ProverLogic, transport: T, record: bool) -> Outcome {
    let mut link = Link::new(transport, None, Direction::ToVerifier, record);
    let result = pump_prover(prover, &mut link);
    if let Err(e) = &result {
        if !matches!(e, ProtocolError::Aborted(_) | ProtocolError::Closed) && link.session().is_some() {
            let _ = link.send(&Message::Abort { reason: e.to_string() });
        }
    }
    Outcome {
        result,
        transcript: link.transcript.take().unwrap_or_default(),
    }
}

fn pump_prover<T: Transport>(prover: &mut dyn ProverLogic, link: &mut Link<T>) -> Result<Report> {
    loop {
        let msg = link.recv()?;
        for out in prover.handle(&msg)? {
            link.send(&out)?;
        }
        if let Some(r) = prover.verdict() {
            return Ok(r.clone());
        }
    }
}

/// Verifier and prover in two threads over an in-process channel.
pub fn run_local(config: &SessionConfig) -> Outcome {
    let verifier = match config.verifier() {
        Ok(v) => v,
        Err(e) => {
            return Outcome {
                result: Err(e),
                transcript: Transcript::default(),
            }
        }
    };
    let (vt, pt) = ChannelTransport::pair(config.timeout);
    let mut prover = config.prover();
    let handle = thread::spawn(move || run_prover(prover.as_mut(), pt, false));
    let outcome = run_verifier(verifier, vt, config.session_id());
    let _ = handle.join();
    outcome
}

/// Accepts `sessions` connections on `listener`, each served concurrently
/// by its own verifier. Connection `k` uses session index
/// `config.session_index + k`.
pub fn serve(config: &SessionConfig, listener: &TcpListener, sessions: usize) -> Result<Vec<Outcome>> {
    let mut handles = Vec::with_capacity(sessions);
    for k in 0..sessions {
        let (stream, _) = listener.accept()?;
        let mut cfg = config.clone();
        cfg.session_index += k as u64;
        handles.push(thread::spawn(move || -> Outcome {
            let prepared = cfg
                .verifier()
                .and_then(|v| Ok((v, TcpTransport::new(stream, cfg.timeout)?)));
            match prepared {
                Ok((v, t)) => run_verifier(v, t, cfg.session_id()),
                Err(e) => Outcome {
                    result: Err(e),
                    transcript: Transcript::default(),
                },
            }
        }));
    }
    Ok(handles
        .into_iter()
        .map(|h| h.join().expect("session thread panicked"))
        .collect())
}

/// Connects to a listening verifier and runs the configured prover.
pub fn connect(config: &SessionConfig, addr: &str) -> Outcome {
    match TcpTransport::connect(addr, config.timeout) {
        Ok(t) => run_prover(config.prover().as_mut(), t, true),
        Err(e) => Outcome {
            result: Err(e),
            transcript: Transcript::default(),
        },
    }
}

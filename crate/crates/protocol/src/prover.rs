//! Honest quantum prover and the classical baseline.

use dpoq_core::randenc::EncodedFunction;
use dpoq_core::BitVec;
use dpoq_qsim::prover::{BellPending, PostCommit};
use dpoq_qsim::{DepthMeter, Engine, ProverCircuit};
use rand::Rng;

use crate::error::{ProtocolError, Result};
use crate::message::{Bits, Message, Protocol};
use crate::score::Report;
use crate::seeds::{SessionSeeds, PROVER};

/// Step labels for the per-measurement generators; commits use the attempt
/// number, responses start at `RESPONSE`.
const RESPONSE: u64 = 1 << 32;

pub trait ProverLogic: Send {
    /// Consumes one verifier message and returns the replies.
    fn handle(&mut self, msg: &Message) -> Result<Vec<Message>>;
    fn verdict(&self) -> Option<&Report>;
}

fn unexpected(what: &str, msg: &Message) -> ProtocolError {
    ProtocolError::Order {
        expected: what.into(),
        got: msg.kind().into(),
    }
}

#[derive(Default)]
struct Session {
    protocol: Option<Protocol>,
    rounds: usize,
    verdict: Option<Report>,
}

impl Session {
    fn protocol(&self) -> Result<Protocol> {
        self.protocol.ok_or_else(|| ProtocolError::Order {
            expected: "key".into(),
            got: "a round message".into(),
        })
    }

    fn more_rounds(&self, round: usize) -> bool {
        round + 1 < self.rounds
    }
}

/// Drives the simulator through the honest strategy.
pub struct QuantumProver {
    seeds: SessionSeeds,
    engine: Engine,
    session: Session,
    circuit: Option<ProverCircuit>,
    post: Option<PostCommit>,
    pending: Option<BellPending>,
    meter: DepthMeter,
    /// The meter of the deepest completed round.
    deepest: DepthMeter,
    step: u64,
}

impl QuantumProver {
    pub fn new(seeds: SessionSeeds, engine: Engine) -> Self {
        QuantumProver {
            seeds,
            engine,
            session: Session::default(),
            circuit: None,
            post: None,
            pending: None,
            meter: DepthMeter::new(),
            deepest: DepthMeter::new(),
            step: 0,
        }
    }

    pub fn deepest_meter(&self) -> &DepthMeter {
        &self.deepest
    }

    fn circuit(&self) -> Result<&ProverCircuit> {
        self.circuit.as_ref().ok_or_else(|| ProtocolError::Order {
            expected: "key".into(),
            got: "a round message".into(),
        })
    }

    fn rng(&mut self, round: usize) -> rand_chacha::ChaCha8Rng {
        self.step += 1;
        self.seeds.step_rng(PROVER, round, RESPONSE + self.step)
    }

    fn commit(&mut self, round: usize, attempt: usize) -> Result<Message> {
        let with_ancilla = self.session.protocol()? == Protocol::Kmcvy;
        let mut rng = self.seeds.step_rng(PROVER, round, attempt as u64);
        let c = self.circuit()?.commit(self.engine, with_ancilla, &mut rng)?;
        self.meter = c.meter;
        self.post = c.post;
        self.pending = None;
        self.step = 0;
        Ok(Message::Commit {
            round,
            y_hat: Bits(c.y_hat),
        })
    }

    fn take_post(&mut self, msg: &Message) -> Result<PostCommit> {
        self.post.take().ok_or_else(|| unexpected("resample", msg))
    }

    fn end_round(&mut self, round: usize, reply: Message) -> Result<Vec<Message>> {
        if self.meter.totals() > self.deepest.totals() {
            self.deepest = self.meter.clone();
        }
        let mut out = vec![reply];
        if self.session.more_rounds(round) {
            out.push(self.commit(round + 1, 0)?);
        }
        Ok(out)
    }
}

impl ProverLogic for QuantumProver {
    fn handle(&mut self, msg: &Message) -> Result<Vec<Message>> {
        match msg {
            Message::Key { protocol, rounds, key } => {
                if self.session.protocol.is_some() {
                    return Err(unexpected("a round message", msg));
                }
                self.session.protocol = Some(*protocol);
                self.session.rounds = *rounds;
                self.circuit = Some(ProverCircuit::new(key)?);
                Ok(vec![self.commit(0, 0)?])
            }
            Message::Resample { round, attempt } => Ok(vec![self.commit(*round, *attempt)?]),
            Message::Challenge { round, c: 0 } => {
                let post = self.take_post(msg)?;
                let mut rng = self.rng(*round);
                let pre = post.preimage_test(&mut rng, &mut self.meter)?;
                self.end_round(*round, Message::Preimage {
                    round: *round,
                    x_hat: Bits(pre),
                })
            }
            Message::Challenge { round, c: 1 } => match self.session.protocol()? {
                Protocol::Bcmvv => {
                    let post = self.take_post(msg)?;
                    let mut rng = self.rng(*round);
                    let d = post.equation_test(&mut rng, &mut self.meter)?;
                    self.end_round(*round, Message::Equation {
                        round: *round,
                        d: Bits(d),
                    })
                }
                Protocol::Kmcvy => Ok(Vec::new()),
            },
            Message::BellV { round, v } => {
                let post = self.take_post(msg)?;
                let mut rng = self.rng(*round);
                let (d, pending) = post.bell_measure(&v.0, &mut rng, &mut self.meter)?;
                self.pending = Some(pending);
                Ok(vec![Message::BellD {
                    round: *round,
                    d: Bits(d),
                }])
            }
            Message::BellPhi { round, phi } => {
                let pending = self.pending.take().ok_or_else(|| unexpected("bell_v", msg))?;
                let mut rng = self.rng(*round);
                let bit = pending.finish(phi.radians(), &mut rng, &mut self.meter);
                self.end_round(*round, Message::BellBit {
                    round: *round,
                    bit: bit as u8,
                })
            }
            Message::Finish {} => Ok(vec![Message::Meter {
                meter: self.deepest.clone(),
            }]),
            Message::Verdict { report } => {
                self.session.verdict = Some(report.clone());
                Ok(Vec::new())
            }
            Message::Abort { reason } => Err(ProtocolError::Aborted(reason.clone())),
            other => Err(unexpected("a verifier message", other)),
        }
    }

    fn verdict(&self) -> Option<&Report> {
        self.session.verdict.as_ref()
    }
}

/// Commits to a classically sampled preimage, answers preimage tests with
/// it and every other test with uniform random values.
pub struct ClassicalProver {
    seeds: SessionSeeds,
    session: Session,
    f: Option<EncodedFunction>,
    preimage: Option<BitVec>,
}

impl ClassicalProver {
    pub fn new(seeds: SessionSeeds) -> Self {
        ClassicalProver {
            seeds,
            session: Session::default(),
            f: None,
            preimage: None,
        }
    }

    fn function(&self) -> Result<&EncodedFunction> {
        self.f.as_ref().ok_or_else(|| ProtocolError::Order {
            expected: "key".into(),
            got: "a round message".into(),
        })
    }

    fn commit(&mut self, round: usize, attempt: usize) -> Result<Message> {
        let mut rng = self.seeds.step_rng(PROVER, round, attempt as u64);
        let f = self.function()?;
        let x = BitVec::random(f.num_inputs(), &mut rng);
        let pre = f.random_preimage(&x, &mut rng);
        let y_hat = f.apply_hat(&pre)?;
        self.preimage = Some(pre);
        Ok(Message::Commit {
            round,
            y_hat: Bits(y_hat),
        })
    }

    fn random_bits(&self, round: usize) -> Result<BitVec> {
        let mut rng = self.seeds.step_rng(PROVER, round, RESPONSE);
        Ok(BitVec::random(self.function()?.preimage_len(), &mut rng))
    }

    fn end_round(&mut self, round: usize, reply: Message) -> Result<Vec<Message>> {
        let mut out = vec![reply];
        if self.session.more_rounds(round) {
            out.push(self.commit(round + 1, 0)?);
        }
        Ok(out)
    }
}

impl ProverLogic for ClassicalProver {
    fn handle(&mut self, msg: &Message) -> Result<Vec<Message>> {
        match msg {
            Message::Key { protocol, rounds, key } => {
                if self.session.protocol.is_some() {
                    return Err(unexpected("a round message", msg));
                }
                self.session.protocol = Some(*protocol);
                self.session.rounds = *rounds;
                self.f = Some(dpoq_qsim::prover::encode_key(key)?);
                Ok(vec![self.commit(0, 0)?])
            }
            Message::Resample { round, attempt } => Ok(vec![self.commit(*round, *attempt)?]),
            Message::Challenge { round, c: 0 } => {
                let pre = self.preimage.take().ok_or_else(|| unexpected("commit", msg))?;
                self.end_round(*round, Message::Preimage {
                    round: *round,
                    x_hat: Bits(pre),
                })
            }
            Message::Challenge { round, c: 1 } => match self.session.protocol()? {
                Protocol::Bcmvv => {
                    let d = self.random_bits(*round)?;
                    self.end_round(*round, Message::Equation {
                        round: *round,
                        d: Bits(d),
                    })
                }
                Protocol::Kmcvy => Ok(Vec::new()),
            },
            Message::BellV { round, .. } => Ok(vec![Message::BellD {
                round: *round,
                d: Bits(self.random_bits(*round)?),
            }]),
            Message::BellPhi { round, .. } => {
                let mut rng = self.seeds.step_rng(PROVER, *round, RESPONSE + 1);
                let bit = rng.gen::<bool>() as u8;
                self.end_round(*round, Message::BellBit { round: *round, bit })
            }
            Message::Finish {} => Ok(vec![Message::Meter {
                meter: DepthMeter::new(),
            }]),
            Message::Verdict { report } => {
                self.session.verdict = Some(report.clone());
                Ok(Vec::new())
            }
            Message::Abort { reason } => Err(ProtocolError::Aborted(reason.clone())),
            other => Err(unexpected("a verifier message", other)),
        }
    }

    fn verdict(&self) -> Option<&Report> {
        self.session.verdict.as_ref()
    }
}

//! Verifier state machine shared by both protocols.
//!
//! ```text
//! -> key
//! per round:  <- commit  [-> resample, <- commit]*  -> challenge c
//!   c = 0:            <- preimage
//!   c = 1 (bcmvv):    <- equation
//!   c = 1 (kmcvy):    -> bell_v  <- bell_d  -> bell_phi  <- bell_bit
//! -> finish  <- meter  -> verdict
//! ```

use std::collections::HashMap;

use dpoq_core::randenc::EncodedFunction;
use dpoq_core::tcf::{TcfKey, TcfTrapdoor};
use dpoq_core::BitVec;
use dpoq_qsim::prover::encode_key;
use rand::Rng;

use crate::error::{ProtocolError, Result};
use crate::invert::{bell_gamma, encoded_invert, likely_bit, Gamma};
use crate::message::{Bits, Message, Phi, Protocol};
use crate::score::{reject_report, score_report, Report, Scoreboard};
use crate::seeds::{SessionSeeds, VERIFIER};

pub const DEFAULT_MAX_RESAMPLES: usize = 64;
/// Largest input width for which the brute-force claw table is built.
pub const CROSS_CHECK_BITS: usize = 16;

#[derive(Clone, Debug)]
enum State {
    Opening,
    AwaitCommit { round: usize, attempt: usize },
    AwaitPreimage { round: usize, y_hat: BitVec, y: u64 },
    AwaitEquation { round: usize, claw: (BitVec, BitVec) },
    AwaitBellD { round: usize, claw: (BitVec, BitVec), v: BitVec },
    AwaitBellBit { round: usize, gamma: Gamma, phi: Phi },
    AwaitMeter,
    Done,
}

impl State {
    fn expects(&self) -> &'static str {
        match self {
            State::Opening => "nothing before the key",
            State::AwaitCommit { .. } => "commit",
            State::AwaitPreimage { .. } => "preimage",
            State::AwaitEquation { .. } => "equation",
            State::AwaitBellD { .. } => "bell_d",
            State::AwaitBellBit { .. } => "bell_bit",
            State::AwaitMeter => "meter",
            State::Done => "end of session",
        }
    }
}

pub struct Verifier {
    protocol: Protocol,
    rounds: usize,
    threshold: f64,
    max_resamples: usize,
    key: TcfKey,
    trapdoor: TcfTrapdoor,
    f: EncodedFunction,
    claws: Option<HashMap<u64, (u64, u64)>>,
    seeds: SessionSeeds,
    rng: rand_chacha::ChaCha8Rng,
    pub board: Scoreboard,
    state: State,
    report: Option<Report>,
    meter: (usize, usize),
}

impl Verifier {
    pub fn new(
        protocol: Protocol,
        rounds: usize,
        threshold: f64,
        key: TcfKey,
        trapdoor: TcfTrapdoor,
        seeds: SessionSeeds,
    ) -> Result<Self> {
        if rounds == 0 {
            return Err(ProtocolError::Config("at least one round is required".into()));
        }
        if protocol == Protocol::Kmcvy && threshold <= 0.0 {
            return Err(ProtocolError::Config("the threshold must be positive".into()));
        }
        let f = encode_key(&key)?;
        let claws = if key.input_bits() <= CROSS_CHECK_BITS {
            Some(
                key.claws_bruteforce()?
                    .into_iter()
                    .map(|(y, a, b)| (y, (a, b)))
                    .collect(),
            )
        } else {
            None
        };
        Ok(Verifier {
            protocol,
            rounds,
            threshold,
            max_resamples: DEFAULT_MAX_RESAMPLES,
            key,
            trapdoor,
            f,
            claws,
            seeds,
            rng: seeds.step_rng(VERIFIER, 0, 0),
            board: Scoreboard::default(),
            state: State::Opening,
            report: None,
            meter: (0, 0),
        })
    }

    pub fn with_max_resamples(mut self, n: usize) -> Self {
        self.max_resamples = n;
        self
    }

    pub fn function(&self) -> &EncodedFunction {
        &self.f
    }

    pub fn key(&self) -> &TcfKey {
        &self.key
    }

    pub fn is_done(&self) -> bool {
        matches!(self.state, State::Done)
    }

    pub fn report(&self) -> Option<&Report> {
        self.report.as_ref()
    }

    pub fn open(&mut self) -> Message {
        self.state = State::AwaitCommit { round: 0, attempt: 0 };
        Message::Key {
            protocol: self.protocol,
            rounds: self.rounds,
            key: self.key.clone(),
        }
    }

    fn check_round(want: usize, msg: &Message) -> Result<()> {
        match msg.round() {
            Some(r) if r == want => Ok(()),
            r => Err(ProtocolError::Order {
                expected: format!("round {want}"),
                got: format!("{} for round {r:?}", msg.kind()),
            }),
        }
    }

    fn check_len(&self, bits: &Bits, len: usize, what: &str) -> Result<()> {
        if bits.0.len() == len {
            Ok(())
        } else {
            Err(ProtocolError::Malformed(format!(
                "{what} has {} bits, expected {len}",
                bits.0.len()
            )))
        }
    }

    /// Inverts with the trapdoor and, where the table exists, cross-checks
    /// against brute force.
    fn invert(&self, y_hat: &BitVec) -> Result<Option<(BitVec, BitVec)>> {
        let claw = encoded_invert(&self.trapdoor, &self.key, &self.f, y_hat)?;
        if let Some(table) = &self.claws {
            let y = self.f.decode(y_hat)?;
            let m = self.f.num_inputs();
            let expect = table.get(&y).map(|&(a, b)| (a, b));
            let got = claw
                .as_ref()
                .map(|(a, b)| (a.slice(0..m).to_u64(), b.slice(0..m).to_u64()));
            if expect != got {
                return Err(ProtocolError::Aborted(format!(
                    "trapdoor inversion {got:?} disagrees with brute force {expect:?} at y = {y}"
                )));
            }
        }
        Ok(claw)
    }

    fn next_round(&mut self, round: usize) -> Vec<Message> {
        if round + 1 == self.rounds {
            self.state = State::AwaitMeter;
            vec![Message::Finish {}]
        } else {
            self.state = State::AwaitCommit {
                round: round + 1,
                attempt: 0,
            };
            Vec::new()
        }
    }

    fn reject(&mut self, reason: &str) -> Vec<Message> {
        let report = reject_report(&self.board, self.protocol, self.rounds, self.threshold, self.meter, reason);
        self.report = Some(report.clone());
        self.state = State::Done;
        vec![Message::Verdict { report }]
    }

    /// Consumes one prover message and returns the replies.
    pub fn handle(&mut self, msg: Message) -> Result<Vec<Message>> {
        let state = std::mem::replace(&mut self.state, State::Done);
        let result = self.dispatch(state.clone(), &msg);
        // Errors leave the machine where it was.
        if result.is_err() {
            self.state = state;
        }
        result
    }

    fn dispatch(&mut self, state: State, msg: &Message) -> Result<Vec<Message>> {
        match (state, msg) {
            (State::AwaitCommit { round, attempt }, Message::Commit { y_hat, .. }) => {
                Self::check_round(round, msg)?;
                self.check_len(y_hat, self.f.output_len(), "image")?;
                self.board.commits += 1;
                self.rng = self.seeds.step_rng(VERIFIER, round, attempt as u64);
                let y_hat = y_hat.0.clone();
                let Some(claw) = self.invert(&y_hat)? else {
                    self.board.degenerate += 1;
                    if attempt + 1 > self.max_resamples {
                        return Err(ProtocolError::Aborted(format!(
                            "round {round}: {} degenerate commits in a row",
                            attempt + 1
                        )));
                    }
                    self.state = State::AwaitCommit {
                        round,
                        attempt: attempt + 1,
                    };
                    return Ok(vec![Message::Resample {
                        round,
                        attempt: attempt + 1,
                    }]);
                };
                let c = self.rng.gen::<bool>() as u8;
                let mut out = vec![Message::Challenge { round, c }];
                self.state = match (c, self.protocol) {
                    (0, _) => {
                        let y = self.f.decode(&y_hat)?;
                        State::AwaitPreimage { round, y_hat, y }
                    }
                    (_, Protocol::Bcmvv) => State::AwaitEquation { round, claw },
                    (_, Protocol::Kmcvy) => {
                        let v = BitVec::random(self.f.preimage_len(), &mut self.rng);
                        out.push(Message::BellV {
                            round,
                            v: Bits(v.clone()),
                        });
                        State::AwaitBellD { round, claw, v }
                    }
                };
                Ok(out)
            }
            (State::AwaitPreimage { round, y_hat, y }, Message::Preimage { x_hat, .. }) => {
                Self::check_round(round, msg)?;
                self.check_len(x_hat, self.f.preimage_len(), "preimage")?;
                let x = self.f.input_of(&x_hat.0).to_u64();
                let ok = self.key.chk(x, y) && self.f.apply_hat(&x_hat.0)? == y_hat;
                self.board.record_pre(ok);
                if !ok && self.protocol == Protocol::Kmcvy {
                    return Ok(self.reject(&format!("round {round}: preimage test failed")));
                }
                Ok(self.next_round(round))
            }
            (State::AwaitEquation { round, claw }, Message::Equation { d, .. }) => {
                Self::check_round(round, msg)?;
                self.check_len(d, self.f.preimage_len(), "equation")?;
                let ok = !d.0.dot(&claw.0.xor(&claw.1));
                self.board.record_eq(ok, d.0.is_zero());
                Ok(self.next_round(round))
            }
            (State::AwaitBellD { round, claw, v }, Message::BellD { d, .. }) => {
                Self::check_round(round, msg)?;
                self.check_len(d, self.f.preimage_len(), "bell_d")?;
                let gamma = bell_gamma(&claw.0, &claw.1, &v, &d.0);
                let phi = if self.rng.gen::<bool>() { Phi::Plus } else { Phi::Minus };
                self.state = State::AwaitBellBit { round, gamma, phi };
                Ok(vec![Message::BellPhi { round, phi }])
            }
            (State::AwaitBellBit { round, gamma, phi }, Message::BellBit { bit, .. }) => {
                Self::check_round(round, msg)?;
                if *bit > 1 {
                    return Err(ProtocolError::Malformed(format!("bit {bit}")));
                }
                self.board.record_bell(*bit == likely_bit(gamma, phi));
                Ok(self.next_round(round))
            }
            (State::AwaitMeter, Message::Meter { meter }) => {
                self.meter = meter.totals();
                let report = score_report(&self.board, self.protocol, self.rounds, self.threshold, self.meter)
                    .unwrap_or_else(|_| {
                        reject_report(
                            &self.board,
                            self.protocol,
                            self.rounds,
                            self.threshold,
                            self.meter,
                            "a test category received no rounds",
                        )
                    });
                self.report = Some(report.clone());
                self.state = State::Done;
                Ok(vec![Message::Verdict { report }])
            }
            (state, msg) => Err(ProtocolError::Order {
                expected: state.expects().into(),
                got: msg.kind().into(),
            }),
        }
    }
}

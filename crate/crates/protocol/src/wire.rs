//! JSON-lines framing and byte-stream transports.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ProtocolError, Result};
use crate::message::Message;

pub const FRAME_VERSION: u64 = 1;
pub const MAX_FRAME_BYTES: usize = 1 << 20;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    pub v: u64,
    pub session: String,
    pub seq: u64,
    #[serde(rename = "type")]
    pub kind: String,
    pub payload: Value,
}

impl WireFrame {
    pub fn new(session: &str, seq: u64, msg: &Message) -> Self {
        let mut tagged = serde_json::to_value(msg).expect("messages serialize");
        let payload = tagged
            .get_mut("payload")
            .map(Value::take)
            .unwrap_or_else(|| Value::Object(Default::default()));
        WireFrame {
            v: FRAME_VERSION,
            session: session.to_string(),
            seq,
            kind: msg.kind().to_string(),
            payload,
        }
    }

    pub fn message(&self) -> Result<Message> {
        if !Message::KINDS.contains(&self.kind.as_str()) {
            return Err(ProtocolError::Malformed(format!("unknown message type `{}`", self.kind)));
        }
        let tagged = serde_json::json!({ "type": self.kind, "payload": self.payload });
        serde_json::from_value(tagged).map_err(|e| ProtocolError::Malformed(format!("{}: {e}", self.kind)))
    }
}

/// One frame as a single line, without the trailing newline.
pub fn encode_frame(session: &str, seq: u64, msg: &Message) -> String {
    serde_json::to_string(&WireFrame::new(session, seq, msg)).expect("frames serialize")
}

/// Parses one line (a trailing newline is allowed).
pub fn decode_frame(line: &str) -> Result<(WireFrame, Message)> {
    if line.len() > MAX_FRAME_BYTES {
        return Err(ProtocolError::Oversize(line.len()));
    }
    let line = line.strip_suffix('\n').unwrap_or(line);
    let frame: WireFrame = serde_json::from_str(line).map_err(|e| ProtocolError::Frame {
        offset: byte_offset(line, e.line(), e.column()),
        msg: e.to_string(),
    })?;
    if frame.v != FRAME_VERSION {
        return Err(ProtocolError::Version(frame.v));
    }
    let msg = frame.message()?;
    Ok((frame, msg))
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column).min(text.len())
}

/// A bidirectional line channel.
pub trait Transport: Send {
    fn send_line(&mut self, line: &str) -> Result<()>;
    /// Next line without its newline.
    fn recv_line(&mut self) -> Result<String>;
}

/// In-process transport over a pair of channels.
pub struct ChannelTransport {
    tx: Sender<String>,
    rx: Receiver<String>,
    timeout: Duration,
}

impl ChannelTransport {
    pub fn pair(timeout: Duration) -> (ChannelTransport, ChannelTransport) {
        let (atx, brx) = mpsc::channel();
        let (btx, arx) = mpsc::channel();
        (
            ChannelTransport {
                tx: atx,
                rx: arx,
                timeout,
            },
            ChannelTransport {
                tx: btx,
                rx: brx,
                timeout,
            },
        )
    }
}

impl Transport for ChannelTransport {
    fn send_line(&mut self, line: &str) -> Result<()> {
        self.tx.send(line.to_string()).map_err(|_| ProtocolError::Closed)
    }

    fn recv_line(&mut self) -> Result<String> {
        match self.rx.recv_timeout(self.timeout) {
            Ok(line) if line.len() > MAX_FRAME_BYTES => Err(ProtocolError::Oversize(line.len())),
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => Err(ProtocolError::Timeout),
            Err(RecvTimeoutError::Disconnected) => Err(ProtocolError::Closed),
        }
    }
}

pub struct TcpTransport {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl TcpTransport {
    pub fn new(stream: TcpStream, timeout: Duration) -> Result<Self> {
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        Ok(TcpTransport {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }

    pub fn connect(addr: &str, timeout: Duration) -> Result<Self> {
        Self::new(TcpStream::connect(addr)?, timeout)
    }
}

impl Transport for TcpTransport {
    fn send_line(&mut self, line: &str) -> Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv_line(&mut self) -> Result<String> {
        let mut buf = Vec::new();
        let limit = (MAX_FRAME_BYTES + 2) as u64;
        let n = (&mut self.reader).take(limit).read_until(b'\n', &mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => ProtocolError::Timeout,
            _ => ProtocolError::Io(e),
        })?;
        if n == 0 {
            return Err(ProtocolError::Closed);
        }
        if buf.last() != Some(&b'\n') {
            return Err(if buf.len() > MAX_FRAME_BYTES {
                ProtocolError::Oversize(buf.len())
            } else {
                ProtocolError::Closed
            });
        }
        buf.pop();
        if buf.len() > MAX_FRAME_BYTES {
            return Err(ProtocolError::Oversize(buf.len()));
        }
        String::from_utf8(buf).map_err(|e| ProtocolError::Frame {
            offset: e.utf8_error().valid_up_to(),
            msg: "invalid UTF-8".into(),
        })
    }
}

/// Direction of a frame relative to the verifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "v->p")]
    ToProver,
    #[serde(rename = "p->v")]
    ToVerifier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    /// Microseconds since the session opened.
    pub t_us: u64,
    pub dir: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    pub frame: WireFrame,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("entries serialize"));
            s.push('\n');
        }
        s
    }

    /// The transcript with timestamps zeroed.
    pub fn canonical(&self) -> String {
        let mut t = self.clone();
        for e in &mut t.entries {
            e.t_us = 0;
        }
        t.to_jsonl()
    }

    pub fn parse(text: &str) -> Result<Transcript> {
        let mut entries = Vec::new();
        let mut offset = 0;
        for line in text.lines() {
            if !line.trim().is_empty() {
                let e: TranscriptEntry = serde_json::from_str(line).map_err(|e| ProtocolError::Frame {
                    offset: offset + e.column(),
                    msg: e.to_string(),
                })?;
                entries.push(e);
            }
            offset += line.len() + 1;
        }
        Ok(Transcript { entries })
    }

    pub fn messages(&self) -> Result<Vec<(Direction, Message)>> {
        self.entries.iter().map(|e| Ok((e.dir, e.frame.message()?))).collect()
    }
}

/// One side of a session: framing, sequence checks and optional recording.
pub struct Link<T: Transport> {
    transport: T,
    session: Option<String>,
    send_seq: u64,
    last_recv: Option<u64>,
    /// Direction of outgoing frames, for the transcript.
    outgoing: Direction,
    started: std::time::Instant,
    pub transcript: Option<Transcript>,
}

impl<T: Transport> Link<T> {
    /// `session = None` adopts the session id of the first received frame.
    pub fn new(transport: T, session: Option<String>, outgoing: Direction, record: bool) -> Self {
        Link {
            transport,
            session,
            send_seq: 0,
            last_recv: None,
            outgoing,
            started: std::time::Instant::now(),
            transcript: record.then(Transcript::default),
        }
    }

    pub fn session(&self) -> Option<&str> {
        self.session.as_deref()
    }

    fn record(&mut self, dir: Direction, frame: WireFrame, round: Option<usize>) {
        let t_us = self.started.elapsed().as_micros() as u64;
        if let Some(t) = &mut self.transcript {
            t.entries.push(TranscriptEntry { t_us, dir, round, frame });
        }
    }

    pub fn send(&mut self, msg: &Message) -> Result<()> {
        let session = self
            .session
            .clone()
            .ok_or_else(|| ProtocolError::Config("no session id yet".into()))?;
        let frame = WireFrame::new(&session, self.send_seq, msg);
        self.send_seq += 1;
        let line = serde_json::to_string(&frame).expect("frames serialize");
        self.transport.send_line(&line)?;
        self.record(self.outgoing, frame, msg.round());
        Ok(())
    }

    pub fn recv(&mut self) -> Result<Message> {
        let line = self.transport.recv_line()?;
        let (frame, msg) = decode_frame(&line)?;
        match &self.session {
            None => self.session = Some(frame.session.clone()),
            Some(s) if *s != frame.session => {
                return Err(ProtocolError::Session {
                    expected: s.clone(),
                    got: frame.session,
                })
            }
            _ => {}
        }
        if let Some(last) = self.last_recv {
            if frame.seq <= last {
                return Err(ProtocolError::Sequence { last, got: frame.seq });
            }
        }
        self.last_recv = Some(frame.seq);
        let incoming = match self.outgoing {
            Direction::ToProver => Direction::ToVerifier,
            Direction::ToVerifier => Direction::ToProver,
        };
        self.record(incoming, frame, msg.round());
        Ok(msg)
    }
}
